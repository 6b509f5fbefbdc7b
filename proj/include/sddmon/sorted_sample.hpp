#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "error.hpp"

namespace sddmon {

/// Ascending, finite, non-empty sample; the carrier of an ECDF.
class SortedSample {
 public:
  /// Sorts a copy of `values`. Throws EmptySample or NonFiniteValue.
  static SortedSample make(std::span<const double> values) {
    validate(values);
    std::vector<double> v(values.begin(), values.end());
    std::stable_sort(v.begin(), v.end());
    return SortedSample(std::move(v));
  }

  /// Adopts values the caller guarantees are already ascending and finite.
  /// Checked in debug builds only; used on hot resampling paths.
  static SortedSample adopt_sorted(std::vector<double> values) {
    if (values.empty()) throw Error(ErrorCode::kEmptySample, "sample has no values");
#ifndef NDEBUG
    validate(values);
    if (!std::is_sorted(values.begin(), values.end()))
      throw Error(ErrorCode::kInvalidArgument, "adopt_sorted: values are not ascending");
#endif
    return SortedSample(std::move(values));
  }

  std::span<const double> values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const noexcept { return values_[i]; }
  double front() const noexcept { return values_.front(); }
  double back() const noexcept { return values_.back(); }

  /// Right-continuous ECDF: (count of values <= x) / size.
  double ecdf(double x) const noexcept {
    auto it = std::upper_bound(values_.begin(), values_.end(), x);
    return static_cast<double>(it - values_.begin()) / static_cast<double>(values_.size());
  }

 private:
  explicit SortedSample(std::vector<double> v) : values_(std::move(v)) {}

  static void validate(std::span<const double> values) {
    if (values.empty()) throw Error(ErrorCode::kEmptySample, "sample has no values");
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (!std::isfinite(values[i]))
        throw Error(ErrorCode::kNonFiniteValue, "non-finite value at index " + std::to_string(i));
    }
  }

  std::vector<double> values_;
};

/// Merges two sorted samples into the pooled ascending sequence.
inline std::vector<double> pooled_values(const SortedSample& a, const SortedSample& b) {
  std::vector<double> out(a.size() + b.size());
  std::merge(a.values().begin(), a.values().end(), b.values().begin(), b.values().end(),
             out.begin());
  return out;
}

}  // namespace sddmon
