#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/distributions/chi_squared.hpp>

#include "sorted_sample.hpp"

namespace sddmon {

/// Evaluation points of the empirical characteristic function, before
/// scaling by the pooled semi-interquartile range.
struct EsParams {
  std::vector<double> t{0.4, 0.8};

  void validate() const {
    if (t.empty()) throw Error(ErrorCode::kInvalidArgument, "EsParams: need at least one t");
    for (double v : t) {
      if (!std::isfinite(v) || v <= 0.0)
        throw Error(ErrorCode::kInvalidArgument, "EsParams: t values must be finite and > 0");
    }
  }
  std::size_t size() const noexcept { return t.size(); }
};

struct EsResult {
  double w2 = 0.0;
  double p_value = 1.0;
  int dof = 0;  // rank of the estimated covariance, nominally 2J
};

/// Upper tail of chi-square with `dof` degrees of freedom.
inline double chi2_sf(double x, int dof) {
  if (dof <= 0) throw Error(ErrorCode::kInvalidArgument, "chi2_sf: dof must be positive");
  if (x <= 0.0) return 1.0;
  if (!std::isfinite(x)) return 0.0;
  boost::math::chi_squared dist(static_cast<double>(dof));
  return boost::math::cdf(boost::math::complement(dist, x));
}

/// Quantile q of chi-square with `dof` degrees of freedom.
inline double chi2_quantile(double q, int dof) {
  boost::math::chi_squared dist(static_cast<double>(dof));
  return boost::math::quantile(dist, q);
}

/// Linear-interpolated quantile of an ascending sequence.
inline double interpolated_quantile(std::span<const double> sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

namespace detail {

// Rows are cos(t x), ..., sin(t x), ... for each observation.
inline Eigen::MatrixXd ecf_components(const SortedSample& s, const Eigen::VectorXd& ts) {
  const auto j = ts.size();
  Eigen::MatrixXd g(static_cast<Eigen::Index>(s.size()), 2 * j);
  for (std::size_t r = 0; r < s.size(); ++r) {
    for (Eigen::Index c = 0; c < j; ++c) {
      const double arg = ts[c] * s[r];
      g(static_cast<Eigen::Index>(r), c) = std::cos(arg);
      g(static_cast<Eigen::Index>(r), c + j) = std::sin(arg);
    }
  }
  return g;
}

// Population (1/n) covariance of the columns of g.
inline Eigen::MatrixXd population_covariance(const Eigen::MatrixXd& g) {
  const Eigen::RowVectorXd mean = g.colwise().mean();
  const Eigen::MatrixXd centered = g.rowwise() - mean;
  return (centered.transpose() * centered) / static_cast<double>(g.rows());
}

}  // namespace detail

/// Epps-Singleton two-sample statistic W2 over the empirical characteristic
/// functions at t_j / semi-IQR(pooled), with its asymptotic chi-square
/// p-value (no small-sample correction).
inline EsResult es_statistic(const SortedSample& a, const SortedSample& b,
                             const EsParams& params = {}) {
  params.validate();
  const std::size_t j = params.size();
  if (a.size() < 2 * j + 1 || b.size() < 2 * j + 1)
    throw Error(ErrorCode::kInsufficientSamples,
                "es_statistic: each sample needs at least " + std::to_string(2 * j + 1) +
                    " values, got " + std::to_string(a.size()) + " and " +
                    std::to_string(b.size()));

  const auto pooled = pooled_values(a, b);
  const double semi_iqr =
      (interpolated_quantile(pooled, 0.75) - interpolated_quantile(pooled, 0.25)) / 2.0;
  if (!(semi_iqr > 0.0))
    throw Error(ErrorCode::kDegenerateSample, "es_statistic: pooled semi-IQR is zero");

  Eigen::VectorXd ts(static_cast<Eigen::Index>(j));
  for (std::size_t c = 0; c < j; ++c) ts[static_cast<Eigen::Index>(c)] = params.t[c] / semi_iqr;

  const Eigen::MatrixXd ga = detail::ecf_components(a, ts);
  const Eigen::MatrixXd gb = detail::ecf_components(b, ts);
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double n = na + nb;

  const Eigen::MatrixXd cov =
      (n / na) * detail::population_covariance(ga) + (n / nb) * detail::population_covariance(gb);
  const Eigen::VectorXd diff = ga.colwise().mean().transpose() - gb.colwise().mean().transpose();

  // Pseudo-inverse through the symmetric eigen-decomposition; the rank
  // tolerance matches the usual SVD-based matrix rank.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  const Eigen::VectorXd& lambda = eig.eigenvalues();
  const double max_abs = lambda.cwiseAbs().maxCoeff();
  const double tol =
      max_abs * static_cast<double>(cov.rows()) * std::numeric_limits<double>::epsilon();
  const Eigen::VectorXd proj = eig.eigenvectors().transpose() * diff;
  double quad = 0.0;
  int rank = 0;
  for (Eigen::Index k = 0; k < lambda.size(); ++k) {
    if (lambda[k] > tol) {
      quad += proj[k] * proj[k] / lambda[k];
      ++rank;
    }
  }
  if (rank == 0)
    throw Error(ErrorCode::kDegenerateSample, "es_statistic: ECF covariance has rank zero");

  EsResult out;
  out.w2 = std::max(0.0, n * quad);
  out.dof = rank;
  out.p_value = chi2_sf(out.w2, rank);
  return out;
}

}  // namespace sddmon
