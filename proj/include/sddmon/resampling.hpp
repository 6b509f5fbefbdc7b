#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "rng.hpp"
#include "sdd.hpp"

namespace sddmon {

inline void require_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw Error(ErrorCode::kInvalidAlpha, "alpha must lie in (0,1), got " + format_double(alpha));
}

namespace detail {

/// Random split of `pooled` (ascending) into ascending halves of sizes
/// `na` and pooled.size() - na, by a partial Fisher-Yates over positions.
inline void random_split(std::span<const double> pooled, std::size_t na, Engine& eng,
                         std::vector<std::size_t>& perm, std::vector<char>& in_a,
                         std::vector<double>& a, std::vector<double>& b) {
  const std::size_t n = pooled.size();
  perm.resize(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  in_a.assign(n, 0);
  for (std::size_t i = 0; i < na; ++i) {
    const std::size_t j = i + uniform_index(eng, n - i);
    std::swap(perm[i], perm[j]);
    in_a[perm[i]] = 1;
  }
  a.clear();
  b.clear();
  for (std::size_t i = 0; i < n; ++i) (in_a[i] ? a : b).push_back(pooled[i]);
}

}  // namespace detail

/// Permutation p-value (1 + #{T* >= T}) / (n_boot + 1) for an ECDF kind,
/// replicate r drawing from derive(seed, kBootstrap, r).
inline double bootstrap_p_value(const SortedSample& a, const SortedSample& b, DistanceKind kind,
                                std::size_t n_boot, RngSeed seed) {
  if (!is_ecdf_kind(kind))
    throw Error(ErrorCode::kUnsupportedKind,
                "bootstrap_p_value: ES has an analytic p-value, use es_statistic");
  if (n_boot < 100)
    throw Error(ErrorCode::kInvalidArgument, "bootstrap_p_value: n_boot must be >= 100");

  const double observed = univariate_distance(a, b, kind);
  const auto pooled = pooled_values(a, b);
  std::vector<std::size_t> perm;
  std::vector<char> in_a;
  std::vector<double> va, vb;
  std::size_t at_least = 0;
  for (std::size_t r = 0; r < n_boot; ++r) {
    auto eng = make_engine(derive(seed, stream::kBootstrap, r));
    detail::random_split(pooled, a.size(), eng, perm, in_a, va, vb);
    // Degenerate splits (all-equal pooled values) cannot arise here because
    // the observed statistic would already have thrown.
    const double t = univariate_distance(SortedSample::adopt_sorted(va),
                                         SortedSample::adopt_sorted(vb), kind);
    if (t >= observed) ++at_least;
  }
  return static_cast<double>(1 + at_least) / static_cast<double>(n_boot + 1);
}

struct CriticalValue {
  DistanceKind kind{};
  double alpha = 0.0;
  std::size_t n = 0;
  std::size_t m2 = 0;
  double value = 0.0;
};

/// Asymptotic two-sample KS critical value c(alpha) * sqrt((n+m)/(n m)),
/// c(alpha) = sqrt(-ln(alpha/2)/2).
inline CriticalValue ks_critical_value(std::size_t n, std::size_t m2, double alpha) {
  require_alpha(alpha);
  if (n == 0 || m2 == 0)
    throw Error(ErrorCode::kInvalidArgument, "ks_critical_value: sizes must be positive");
  const double c = std::sqrt(-std::log(alpha / 2.0) / 2.0);
  const double dn = static_cast<double>(n);
  const double dm = static_cast<double>(m2);
  return {DistanceKind::KolmogorovSmirnov, alpha, n, m2, c * std::sqrt((dn + dm) / (dn * dm))};
}

/// Null AD statistic for one random labelling of N distinct pooled points:
/// only the label order matters, so no values are materialised.
inline double ad_null_statistic(std::span<const char> in_a, std::size_t na) {
  const std::size_t total = in_a.size();
  const double n = static_cast<double>(na);
  const double m = static_cast<double>(total - na);
  const double big_n = static_cast<double>(total);
  std::size_t ca = 0;
  double sum = 0.0;
  for (std::size_t j = 0; j + 1 < total; ++j) {
    ca += in_a[j] ? 1 : 0;
    const double fa = static_cast<double>(ca) / n;
    const double fb = static_cast<double>(j + 1 - ca) / m;
    const double h = static_cast<double>(j + 1) / big_n;
    sum += (fa - fb) * (fa - fb) / (h * (1.0 - h));
  }
  return n * m / (big_n * big_n) * sum;
}

/// (1 - alpha) quantile of the null AD distribution for sizes (n, m2) from
/// `draws` seeded random labellings.
inline CriticalValue ad_critical_value(double alpha, std::size_t n, std::size_t m2, RngSeed seed,
                                       std::size_t draws = 10000) {
  require_alpha(alpha);
  if (n == 0 || m2 == 0)
    throw Error(ErrorCode::kInvalidArgument, "ad_critical_value: sizes must be positive");
  if (draws < 10000)
    throw Error(ErrorCode::kInvalidArgument, "ad_critical_value: need >= 10000 draws");
  const std::size_t total = n + m2;
  std::vector<double> stats(draws);
  std::vector<std::size_t> perm(total);
  std::vector<char> in_a(total);
  for (std::size_t d = 0; d < draws; ++d) {
    auto eng = make_engine(derive(seed, stream::kAdCritical, d));
    for (std::size_t i = 0; i < total; ++i) perm[i] = i;
    std::fill(in_a.begin(), in_a.end(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t j = i + uniform_index(eng, total - i);
      std::swap(perm[i], perm[j]);
      in_a[perm[i]] = 1;
    }
    stats[d] = ad_null_statistic(in_a, n);
  }
  std::sort(stats.begin(), stats.end());
  return {DistanceKind::AndersonDarling, alpha, n, m2, interpolated_quantile(stats, 1.0 - alpha)};
}

/// Per-trial significance level after Bonferroni adjustment for m trials.
inline double bonferroni_level(double alpha, std::size_t trials) {
  require_alpha(alpha);
  if (trials == 0) throw Error(ErrorCode::kInvalidArgument, "trials must be >= 1");
  return alpha / static_cast<double>(trials);
}

struct PowerCurve {
  std::vector<std::size_t> sizes;
  std::vector<double> power;
  double alpha = 0.1;
  std::size_t trials = 0;
  double trial_level = 0.0;  // alpha / trials
  DistanceKind kind = DistanceKind::KolmogorovSmirnov;
  std::optional<std::size_t> n_star;
};

struct PowerOptions {
  bool with_replacement = true;
  EsParams es{};
  std::size_t ad_draws = 10000;
};

namespace detail {

inline FeatureMatrix draw_rows(const FeatureMatrix& x, std::size_t s, bool with_replacement,
                               Engine& eng) {
  std::vector<std::size_t> idx(s);
  if (with_replacement) {
    for (auto& i : idx) i = uniform_index(eng, x.rows());
  } else {
    std::vector<std::size_t> perm(x.rows());
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
    for (std::size_t i = 0; i < s; ++i) {
      std::swap(perm[i], perm[i + uniform_index(eng, perm.size() - i)]);
      idx[i] = perm[i];
    }
  }
  return x.select(idx);
}

}  // namespace detail

/// Bootstrapped power analysis. A trial at size s passes when an in-scope
/// draw of s rows is accepted and an out-of-scope draw is rejected against
/// `reference` at the Bonferroni level alpha / trials. n_star is the first
/// size whose power reaches 1.
inline PowerCurve power_analysis(const FeatureMatrix& in_scope, const FeatureMatrix& out_scope,
                                 const FeatureMatrix& reference,
                                 const std::vector<std::size_t>& sizes, DistanceKind kind,
                                 double alpha, std::size_t trials, RngSeed seed,
                                 const PowerOptions& opts = {}) {
  if (kind != DistanceKind::KolmogorovSmirnov && kind != DistanceKind::AndersonDarling &&
      kind != DistanceKind::EppsSingleton)
    throw Error(ErrorCode::kUnsupportedKind, "power_analysis supports KS, AD and ES only, got " +
                                                 std::string(to_tag(kind)));
  const double level = bonferroni_level(alpha, trials);
  if (sizes.empty()) throw Error(ErrorCode::kInvalidArgument, "power_analysis: no sizes");
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (sizes[i] == 0 || (i > 0 && sizes[i] <= sizes[i - 1]))
      throw Error(ErrorCode::kInvalidArgument,
                  "power_analysis: sizes must be positive and strictly ascending");
  }
  if (in_scope.cols() != reference.cols() || out_scope.cols() != reference.cols())
    throw Error(ErrorCode::kDimensionMismatch, "power_analysis: feature counts differ");
  if (in_scope.empty() || out_scope.empty())
    throw Error(ErrorCode::kEmptySample, "power_analysis: empty input set");
  if (!opts.with_replacement &&
      (sizes.back() > in_scope.rows() || sizes.back() > out_scope.rows()))
    throw Error(ErrorCode::kSizeExceedsData,
                "power_analysis: size " + std::to_string(sizes.back()) +
                    " exceeds available rows without replacement");

  const SortedColumns ref(reference);
  PowerCurve curve;
  curve.sizes = sizes;
  curve.alpha = alpha;
  curve.trials = trials;
  curve.trial_level = level;
  curve.kind = kind;
  for (std::size_t si = 0; si < sizes.size(); ++si) {
    const std::size_t s = sizes[si];
    std::optional<double> critical;
    if (kind == DistanceKind::KolmogorovSmirnov)
      critical = ks_critical_value(s, ref.rows(), level).value;
    else if (kind == DistanceKind::AndersonDarling)
      critical =
          ad_critical_value(level, s, ref.rows(), derive(seed, stream::kAdCritical, si),
                            opts.ad_draws)
              .value;

    std::size_t passed = 0;
    for (std::size_t t = 0; t < trials; ++t) {
      auto eng = make_engine(derive(seed, stream::kPowerTrial, si * 1000003ULL + t));
      const auto in_draw = detail::draw_rows(in_scope, s, opts.with_replacement, eng);
      const auto out_draw = detail::draw_rows(out_scope, s, opts.with_replacement, eng);
      const auto in_sdd = sdd(ref, in_draw, kind, opts.es);
      const auto out_sdd = sdd(ref, out_draw, kind, opts.es);
      bool pass = false;
      if (critical) {
        pass = in_sdd.aggregate < *critical && out_sdd.aggregate > *critical;
      } else {
        pass = *in_sdd.p_value > level && *out_sdd.p_value < level;
      }
      if (pass) ++passed;
    }
    curve.power.push_back(static_cast<double>(passed) / static_cast<double>(trials));
    if (!curve.n_star && passed == trials) curve.n_star = s;
  }
  return curve;
}

}  // namespace sddmon
