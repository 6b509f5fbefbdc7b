#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "least_squares.hpp"
#include "rng.hpp"
#include "sdd.hpp"

namespace sddmon {

// ---------------------------------------------------------------------------
// Calibration sets
// ---------------------------------------------------------------------------

/// Batches i = 0..m of n rows each, batch i holding ceil(i n / m) rows
/// labelled correct and the remainder labelled incorrect, in shuffled order.
struct CalibrationSet {
  std::size_t n = 0;
  std::size_t m = 0;
  std::vector<FeatureMatrix> batches;
  std::vector<double> nominal_ratio;
  std::vector<double> observed_accuracy;
};

struct BuildSetOptions {
  bool with_replacement = false;
};

/// Number of correct rows in batch i: ceil(i n / m) in exact integer arithmetic.
constexpr std::size_t correct_count(std::size_t i, std::size_t n, std::size_t m) noexcept {
  return (i * n + m - 1) / m;
}

inline CalibrationSet build_set(const FeatureMatrix& x_cal, std::size_t n, std::size_t m,
                                RngSeed seed, const BuildSetOptions& opts = {}) {
  if (!x_cal.has_labels())
    throw Error(ErrorCode::kInvalidArgument, "build_set: calibration data needs 'correct' labels");
  if (n == 0 || m == 0) throw Error(ErrorCode::kInvalidArgument, "build_set: n and m must be >= 1");

  std::vector<std::size_t> good, bad;
  for (std::size_t r = 0; r < x_cal.rows(); ++r) ((*x_cal.labels())[r] ? good : bad).push_back(r);

  const auto need_good = correct_count(m, n, m);  // == n
  const auto need_bad = n - correct_count(0, n, m);
  if (opts.with_replacement) {
    if (good.empty() || bad.empty())
      throw Error(ErrorCode::kInsufficientLabelled,
                  "build_set: need at least one row of each label");
  } else if (good.size() < need_good || bad.size() < need_bad) {
    throw Error(ErrorCode::kInsufficientLabelled,
                "build_set: need " + std::to_string(n) + " rows of each label, have " +
                    std::to_string(good.size()) + " correct and " + std::to_string(bad.size()) +
                    " incorrect");
  }

  auto sample = [&](std::vector<std::size_t>& pool, std::size_t k, Engine& eng,
                    std::vector<std::size_t>& into) {
    if (opts.with_replacement) {
      for (std::size_t i = 0; i < k; ++i) into.push_back(pool[uniform_index(eng, pool.size())]);
      return;
    }
    for (std::size_t i = 0; i < k; ++i) {
      std::swap(pool[i], pool[i + uniform_index(eng, pool.size() - i)]);
      into.push_back(pool[i]);
    }
  };

  CalibrationSet set;
  set.n = n;
  set.m = m;
  for (std::size_t i = 0; i <= m; ++i) {
    auto eng = make_engine(derive(seed, stream::kBuildSet, i));
    const std::size_t n_good = correct_count(i, n, m);
    std::vector<std::size_t> idx;
    idx.reserve(n);
    sample(good, n_good, eng, idx);
    sample(bad, n - n_good, eng, idx);
    for (std::size_t k = idx.size(); k > 1; --k) std::swap(idx[k - 1], idx[uniform_index(eng, k)]);
    auto batch = x_cal.select(idx);
    set.observed_accuracy.push_back(batch.accuracy());
    set.nominal_ratio.push_back(static_cast<double>(i) / static_cast<double>(m));
    set.batches.push_back(std::move(batch));
  }
  return set;
}

struct CalibrationPoint {
  double sdd = 0.0;
  double inaccuracy = 0.0;
};

/// One (aggregate SDD, 1 - observed accuracy) point per batch.
inline std::vector<CalibrationPoint> measure_calibration(const CalibrationSet& cal,
                                                         const SortedColumns& reference,
                                                         DistanceKind kind,
                                                         const EsParams& es = {}) {
  std::vector<CalibrationPoint> pts;
  pts.reserve(cal.batches.size());
  for (std::size_t i = 0; i < cal.batches.size(); ++i)
    pts.push_back({sdd(reference, cal.batches[i], kind, es).aggregate,
                   1.0 - cal.observed_accuracy[i]});
  return pts;
}

inline std::vector<CalibrationPoint> measure_calibration(const CalibrationSet& cal,
                                                         const FeatureMatrix& reference,
                                                         DistanceKind kind,
                                                         const EsParams& es = {}) {
  return measure_calibration(cal, SortedColumns(reference), kind, es);
}

// ---------------------------------------------------------------------------
// Estimators
// ---------------------------------------------------------------------------

enum class FitForm { Poly2, Log3, Sigmoid3 };

inline std::string_view to_tag(FitForm f) noexcept {
  switch (f) {
    case FitForm::Poly2: return "poly2";
    case FitForm::Log3: return "log3";
    case FitForm::Sigmoid3: return "sigmoid3";
  }
  return "?";
}

inline FitForm form_from_tag(std::string_view tag) {
  for (auto f : {FitForm::Poly2, FitForm::Log3, FitForm::Sigmoid3})
    if (to_tag(f) == tag) return f;
  throw Error(ErrorCode::kParseError, "unknown fit form '" + std::string(tag) +
                                          "' (expected poly2, log3 or sigmoid3)");
}

inline FitForm default_form(DistanceKind kind) noexcept {
  return kind == DistanceKind::EppsSingleton ? FitForm::Log3 : FitForm::Poly2;
}

/// Scope compliance uncertainty estimator: a fitted curve from SDD to
/// expected inaccuracy, made monotone by a running maximum from sdd_min and
/// clamped to [0,1]; 0 below the calibrated SDD range and 1 above it.
///
/// Coefficients: Poly2 (p0, p1, p2); Log3 (a, b, c); Sigmoid3 (L, k, x0).
struct Scue {
  DistanceKind kind = DistanceKind::KolmogorovSmirnov;
  FitForm form = FitForm::Poly2;
  std::array<double, 3> coeffs{};
  double sdd_min = 0.0;
  double sdd_max = 1.0;
  double fit_rmse = 0.0;
  double fit_r2 = 0.0;

  /// The fitted curve without envelope or clamp.
  double raw(double x) const noexcept {
    const auto& c = coeffs;
    switch (form) {
      case FitForm::Poly2: return c[0] + c[1] * x + c[2] * x * x;
      case FitForm::Log3: return c[0] * std::log(x + c[1]) + c[2];
      case FitForm::Sigmoid3: return c[0] / (1.0 + std::exp(-c[1] * (x - c[2])));
    }
    return 0.0;
  }

  /// max of raw() over [sdd_min, x], for x in the calibrated range.
  double envelope(double x) const noexcept {
    double best = std::max(raw(sdd_min), raw(x));
    if (form == FitForm::Poly2 && coeffs[2] < 0.0) {
      const double vertex = -coeffs[1] / (2.0 * coeffs[2]);
      if (vertex > sdd_min && vertex < x) best = std::max(best, raw(vertex));
    }
    return best;
  }

  bool operator==(const Scue&) const = default;
};

inline double evaluate_scue(const Scue& s, double x) noexcept {
  if (x > s.sdd_max) return 1.0;
  if (x < s.sdd_min) return 0.0;
  const double v = s.envelope(x);
  if (!(v > 0.0)) return 0.0;  // also maps NaN to 0
  return std::min(v, 1.0);
}

namespace detail {

struct FitData {
  Eigen::VectorXd x;
  Eigen::VectorXd y;
};

inline std::array<double, 3> fit_poly2(const FitData& d) {
  Eigen::MatrixXd design(d.x.size(), 3);
  design.col(0).setOnes();
  design.col(1) = d.x;
  design.col(2) = d.x.array().square().matrix();
  const Eigen::Vector3d p = design.colPivHouseholderQr().solve(d.y);
  return {p[0], p[1], p[2]};
}

// Log3 with b = shift + exp(beta), keeping x + b > 0 on the data.
inline std::optional<LmResult> fit_log3_from(const FitData& d, double shift, double offset) {
  const Eigen::Index m = d.x.size();
  // Linear least squares for (a, c) at the starting b.
  Eigen::MatrixXd design(m, 2);
  design.col(0) = (d.x.array() + shift + offset).log().matrix();
  design.col(1).setOnes();
  const Eigen::Vector2d ac = design.colPivHouseholderQr().solve(d.y);
  Eigen::Vector3d p0(ac[0], std::log(offset), ac[1]);
  auto model = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r, Eigen::MatrixXd& jac) {
    const double eb = std::exp(p[1]);
    const double b = shift + eb;
    if (!std::isfinite(b)) return false;
    r.resize(m);
    jac.resize(m, 3);
    for (Eigen::Index i = 0; i < m; ++i) {
      const double xb = d.x[i] + b;
      if (!(xb > 0.0)) return false;
      const double lg = std::log(xb);
      r[i] = p[0] * lg + p[2] - d.y[i];
      jac(i, 0) = lg;
      jac(i, 1) = p[0] / xb * eb;
      jac(i, 2) = 1.0;
    }
    return true;
  };
  auto res = levenberg_marquardt(model, p0);
  if (!std::isfinite(res.cost)) return std::nullopt;
  res.params[1] = shift + std::exp(res.params[1]);
  return res;
}

// Sigmoid3 with L = 1.5 / (1 + exp(-l)) in (0, 1.5] and k = exp(kappa) > 0.
inline std::optional<LmResult> fit_sigmoid3_from(const FitData& d, double level, double rate,
                                                 double centre) {
  const Eigen::Index m = d.x.size();
  constexpr double kMaxLevel = 1.5;
  const double frac = std::clamp(level / kMaxLevel, 1e-6, 1.0 - 1e-6);
  Eigen::Vector3d p0(std::log(frac / (1.0 - frac)), std::log(rate), centre);
  auto model = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r, Eigen::MatrixXd& jac) {
    const double sl = 1.0 / (1.0 + std::exp(-p[0]));
    const double level_v = kMaxLevel * sl;
    const double k = std::exp(p[1]);
    if (!std::isfinite(k)) return false;
    r.resize(m);
    jac.resize(m, 3);
    for (Eigen::Index i = 0; i < m; ++i) {
      const double s = 1.0 / (1.0 + std::exp(-k * (d.x[i] - p[2])));
      r[i] = level_v * s - d.y[i];
      const double ds = s * (1.0 - s);
      jac(i, 0) = kMaxLevel * sl * (1.0 - sl) * s;
      jac(i, 1) = level_v * ds * (d.x[i] - p[2]) * k;
      jac(i, 2) = -level_v * ds * k;
    }
    return true;
  };
  auto res = levenberg_marquardt(model, p0);
  if (!std::isfinite(res.cost)) return std::nullopt;
  res.params[0] = kMaxLevel / (1.0 + std::exp(-res.params[0]));
  res.params[1] = std::exp(res.params[1]);
  return res;
}

}  // namespace detail

/// Least-squares fit of uncertainty against SDD. Poly2 is linear; Log3 and
/// Sigmoid3 use multistart Levenberg-Marquardt and keep the lowest-cost
/// converged start.
inline Scue fit_scue(std::span<const CalibrationPoint> points, DistanceKind kind, FitForm form) {
  if (points.size() < 5)
    throw Error(ErrorCode::kDegeneratePoints,
                "fit_scue: need at least 5 points, got " + std::to_string(points.size()));
  detail::FitData d{Eigen::VectorXd(static_cast<Eigen::Index>(points.size())),
                    Eigen::VectorXd(static_cast<Eigen::Index>(points.size()))};
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!std::isfinite(points[i].sdd) || !std::isfinite(points[i].inaccuracy))
      throw Error(ErrorCode::kNonFiniteValue, "fit_scue: non-finite point " + std::to_string(i));
    d.x[static_cast<Eigen::Index>(i)] = points[i].sdd;
    d.y[static_cast<Eigen::Index>(i)] = points[i].inaccuracy;
  }
  const double lo = d.x.minCoeff();
  const double hi = d.x.maxCoeff();
  if (!(hi > lo)) throw Error(ErrorCode::kDegeneratePoints, "fit_scue: all sdd values are equal");
  const double range = hi - lo;

  Scue s;
  s.kind = kind;
  s.form = form;
  s.sdd_min = lo;
  s.sdd_max = hi;

  if (form == FitForm::Poly2) {
    s.coeffs = detail::fit_poly2(d);
  } else {
    std::optional<LmResult> best;
    int attempts = 0;
    int max_iter = 0;
    auto consider = [&](std::optional<LmResult> r) {
      ++attempts;
      if (!r) return;
      max_iter = std::max(max_iter, r->iterations);
      if (!r->converged) return;
      if (!best || r->cost < best->cost) best = std::move(r);
    };
    if (form == FitForm::Log3) {
      const double shift = -lo + 1e-9 * std::max(1.0, std::abs(lo) + range);
      for (int e = -6; e <= 3; ++e) consider(detail::fit_log3_from(d, shift, range * std::pow(10.0, e)));
    } else {
      const double ymax = std::clamp(d.y.maxCoeff(), 0.05, 1.5);
      for (double q : {0.25, 0.5, 0.75})
        for (double rate : {1.0, 4.0, 16.0})
          consider(detail::fit_sigmoid3_from(d, ymax, rate / range, lo + q * range));
    }
    if (!best)
      throw Error(ErrorCode::kNonConvergence,
                  "fit_scue: no start of " + std::to_string(attempts) + " converged for " +
                      std::string(to_tag(form)) + " (max iterations used " +
                      std::to_string(max_iter) + ")");
    s.coeffs = {best->params[0], best->params[1], best->params[2]};
  }

  double sse = 0.0;
  const double ymean = d.y.mean();
  double sst = 0.0;
  for (Eigen::Index i = 0; i < d.x.size(); ++i) {
    const double e = s.raw(d.x[i]) - d.y[i];
    sse += e * e;
    sst += (d.y[i] - ymean) * (d.y[i] - ymean);
  }
  s.fit_rmse = std::sqrt(sse / static_cast<double>(d.x.size()));
  s.fit_r2 = sst > 0.0 ? 1.0 - sse / sst : (sse == 0.0 ? 1.0 : 0.0);
  return s;
}

}  // namespace sddmon
