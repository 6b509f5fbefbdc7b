#pragma once

#include <optional>
#include <string>
#include <vector>

#include "distance_kind.hpp"
#include "distances.hpp"
#include "epps_singleton.hpp"
#include "feature_matrix.hpp"

namespace sddmon {

/// Per-feature distances for one (reference, window) pair and their mean.
struct SddResult {
  DistanceKind kind{};
  std::vector<double> per_feature;
  double aggregate = 0.0;
  std::optional<double> p_value;
};

/// Reference feature columns sorted once, reused across many windows.
class SortedColumns {
 public:
  explicit SortedColumns(const FeatureMatrix& x) {
    if (x.rows() == 0) throw Error(ErrorCode::kEmptySample, "reference has no rows");
    columns_.reserve(x.cols());
    for (std::size_t c = 0; c < x.cols(); ++c) columns_.push_back(x.sorted_column(c));
  }
  std::size_t cols() const noexcept { return columns_.size(); }
  std::size_t rows() const noexcept { return columns_.front().size(); }
  const SortedSample& operator[](std::size_t c) const noexcept { return columns_[c]; }

 private:
  std::vector<SortedSample> columns_;
};

/// Univariate distance for an ECDF kind (ES returns W2).
inline double univariate_distance(const SortedSample& a, const SortedSample& b, DistanceKind kind,
                                  const EsParams& es = {}) {
  switch (kind) {
    case DistanceKind::KolmogorovSmirnov: return ks_distance(a, b);
    case DistanceKind::CramerVonMises: return cvm_distance(a, b);
    case DistanceKind::AndersonDarling: return ad_distance(a, b);
    case DistanceKind::Wasserstein: return wasserstein_distance(a, b);
    case DistanceKind::Dts: return dts_distance(a, b);
    case DistanceKind::EppsSingleton: return es_statistic(a, b, es).w2;
  }
  throw Error(ErrorCode::kUnsupportedKind, "unknown distance kind");
}

namespace detail {

inline double exact_mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;  // fixed left-to-right order
  return s / static_cast<double>(v.size());
}

}  // namespace detail

/// Column-wise distance of `window` against the pre-sorted reference and
/// its arithmetic mean. For ES the aggregate's chi-square p-value is attached
/// (dof = largest per-feature covariance rank); other kinds leave it unset.
inline SddResult sdd(const SortedColumns& reference, const FeatureMatrix& window,
                     DistanceKind kind, const EsParams& es = {}) {
  if (reference.cols() != window.cols() || window.cols() == 0)
    throw Error(ErrorCode::kDimensionMismatch,
                "sdd: reference has " + std::to_string(reference.cols()) +
                    " features, window has " + std::to_string(window.cols()));
  if (window.rows() == 0) throw Error(ErrorCode::kEmptySample, "sdd: window has no rows");

  SddResult out;
  out.kind = kind;
  out.per_feature.resize(window.cols());
  int max_dof = 0;
  for (std::size_t c = 0; c < window.cols(); ++c) {
    try {
      const auto col = window.sorted_column(c);
      if (kind == DistanceKind::EppsSingleton) {
        const auto r = es_statistic(reference[c], col, es);
        out.per_feature[c] = r.w2;
        max_dof = std::max(max_dof, r.dof);
      } else {
        out.per_feature[c] = univariate_distance(reference[c], col, kind);
      }
    } catch (const Error& e) {
      throw Error(e.code(), "feature " + std::to_string(c) + ": " + e.what());
    }
  }
  out.aggregate = detail::exact_mean(out.per_feature);
  if (kind == DistanceKind::EppsSingleton) out.p_value = chi2_sf(out.aggregate, max_dof);
  return out;
}

inline SddResult sdd(const FeatureMatrix& reference, const FeatureMatrix& window,
                     DistanceKind kind, const EsParams& es = {}) {
  if (reference.cols() != window.cols())
    throw Error(ErrorCode::kDimensionMismatch,
                "sdd: reference has " + std::to_string(reference.cols()) +
                    " features, window has " + std::to_string(window.cols()));
  return sdd(SortedColumns(reference), window, kind, es);
}

}  // namespace sddmon
