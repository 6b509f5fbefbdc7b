#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

#include "sorted_sample.hpp"

namespace sddmon {

namespace detail {

/// One step of the pooled walk: the ECDFs just after the distinct pooled
/// value `z`, how many pooled points sit at `z`, and the next distinct value
/// (infinity after the last one).
struct PooledStep {
  double z;
  double fa;
  double fb;
  double h;
  std::size_t multiplicity;
  double next;
  bool has_next() const noexcept { return std::isfinite(next); }
};

template <typename Visit>
void walk_pooled(const SortedSample& a, const SortedSample& b, Visit&& visit) {
  const auto av = a.values();
  const auto bv = b.values();
  const std::size_t na = av.size();
  const std::size_t nb = bv.size();
  const double total = static_cast<double>(na + nb);
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < na || j < nb) {
    const double z = std::min(i < na ? av[i] : inf, j < nb ? bv[j] : inf);
    const std::size_t i0 = i;
    const std::size_t j0 = j;
    while (i < na && av[i] == z) ++i;
    while (j < nb && bv[j] == z) ++j;
    const double next = std::min(i < na ? av[i] : inf, j < nb ? bv[j] : inf);
    visit(PooledStep{z, static_cast<double>(i) / static_cast<double>(na),
                     static_cast<double>(j) / static_cast<double>(nb),
                     static_cast<double>(i + j) / total, (i - i0) + (j - j0), next});
  }
}

inline void require_non_degenerate(const SortedSample& a, const SortedSample& b,
                                   const char* what) {
  const double lo = std::min(a.front(), b.front());
  const double hi = std::max(a.back(), b.back());
  if (lo == hi)
    throw Error(ErrorCode::kDegenerateSample,
                std::string(what) + ": all pooled values are identical");
}

inline double size_weight(const SortedSample& a, const SortedSample& b) {
  const double n = static_cast<double>(a.size());
  const double m = static_cast<double>(b.size());
  return n * m / ((n + m) * (n + m));
}

}  // namespace detail

/// Two-sample Kolmogorov-Smirnov statistic sup |F_a - F_b|, in [0, 1].
inline double ks_distance(const SortedSample& a, const SortedSample& b) {
  double d = 0.0;
  detail::walk_pooled(a, b, [&](const detail::PooledStep& s) {
    d = std::max(d, std::abs(s.fa - s.fb));
  });
  return d;
}

/// Two-sample Cramer-von Mises statistic
///   T = nm/(n+m)^2 * sum over pooled points of (F_a - F_b)^2.
inline double cvm_distance(const SortedSample& a, const SortedSample& b) {
  double sum = 0.0;
  detail::walk_pooled(a, b, [&](const detail::PooledStep& s) {
    const double diff = s.fa - s.fb;
    sum += static_cast<double>(s.multiplicity) * diff * diff;
  });
  return detail::size_weight(a, b) * sum;
}

/// Two-sample Anderson-Darling statistic in rank form:
///   A2 = nm/(n+m)^2 * sum over pooled points with H < 1 of
///        (F_a - F_b)^2 / (H (1 - H)),
/// H the pooled ECDF. Tied points each contribute their own term.
inline double ad_distance(const SortedSample& a, const SortedSample& b) {
  detail::require_non_degenerate(a, b, "ad_distance");
  double sum = 0.0;
  detail::walk_pooled(a, b, [&](const detail::PooledStep& s) {
    if (!s.has_next()) return;  // H == 1, weight singular
    const double diff = s.fa - s.fb;
    sum += static_cast<double>(s.multiplicity) * diff * diff / (s.h * (1.0 - s.h));
  });
  return detail::size_weight(a, b) * sum;
}

/// 1-Wasserstein distance: integral of |F_a - F_b| dx, exact on breakpoints.
inline double wasserstein_distance(const SortedSample& a, const SortedSample& b) {
  double area = 0.0;
  detail::walk_pooled(a, b, [&](const detail::PooledStep& s) {
    if (s.has_next()) area += std::abs(s.fa - s.fb) * (s.next - s.z);
  });
  return area;
}

/// DTS statistic: integral of (F_a - F_b)^2 / (H (1 - H)) dx over the pooled
/// breakpoint intervals, where 0 < H < 1 holds on every interior interval.
inline double dts_distance(const SortedSample& a, const SortedSample& b) {
  detail::require_non_degenerate(a, b, "dts_distance");
  double area = 0.0;
  detail::walk_pooled(a, b, [&](const detail::PooledStep& s) {
    if (!s.has_next()) return;
    const double diff = s.fa - s.fb;
    area += diff * diff / (s.h * (1.0 - s.h)) * (s.next - s.z);
  });
  return area;
}

}  // namespace sddmon
