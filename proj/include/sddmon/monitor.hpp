#pragma once

#include <algorithm>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "scue.hpp"
#include "sdd.hpp"

namespace sddmon {

enum class AggregateRule { MaxOverKinds, MeanOverKinds, PerKind };

inline std::string_view to_tag(AggregateRule r) noexcept {
  switch (r) {
    case AggregateRule::MaxOverKinds: return "max";
    case AggregateRule::MeanOverKinds: return "mean";
    case AggregateRule::PerKind: return "per-kind";
  }
  return "?";
}

inline AggregateRule rule_from_tag(std::string_view tag) {
  for (auto r : {AggregateRule::MaxOverKinds, AggregateRule::MeanOverKinds, AggregateRule::PerKind})
    if (to_tag(r) == tag) return r;
  throw Error(ErrorCode::kParseError,
              "unknown aggregate rule '" + std::string(tag) + "' (expected max, mean or per-kind)");
}

enum class Decision { Accept, Reject };

inline std::string_view to_tag(Decision d) noexcept {
  return d == Decision::Accept ? "accept" : "reject";
}

struct MonitorConfig {
  std::size_t window = 50;
  std::size_t stride = 50;  // == window: tumbling windows
  std::vector<DistanceKind> kinds;
  double threshold = 0.5;
  AggregateRule rule = AggregateRule::PerKind;

  void validate() const {
    if (window == 0) throw Error(ErrorCode::kInvalidArgument, "monitor: window must be >= 1");
    if (stride == 0 || stride > window)
      throw Error(ErrorCode::kInvalidArgument, "monitor: stride must lie in [1, window]");
    if (kinds.empty()) throw Error(ErrorCode::kInvalidArgument, "monitor: no distance kinds");
    if (!(threshold >= 0.0 && threshold <= 1.0))
      throw Error(ErrorCode::kInvalidArgument, "monitor: threshold must lie in [0,1]");
  }
};

struct KindUncertainty {
  DistanceKind kind{};
  double sdd = 0.0;
  double uncertainty = 0.0;
  bool operator==(const KindUncertainty&) const = default;
};

struct UncertaintyReport {
  std::size_t window_id = 0;
  std::vector<KindUncertainty> per_kind;  // in config kind order
  Decision decision = Decision::Accept;
  std::size_t first_index = 0;  // stream indices, inclusive
  std::size_t last_index = 0;
  bool operator==(const UncertaintyReport&) const = default;
};

/// Combined uncertainty under `rule`. PerKind rejects when any kind exceeds
/// the threshold, which is the same test as on the maximum.
inline double aggregate_uncertainty(const UncertaintyReport& report, AggregateRule rule) {
  if (report.per_kind.empty()) return 0.0;
  if (rule == AggregateRule::MeanOverKinds) {
    double s = 0.0;
    for (const auto& k : report.per_kind) s += k.uncertainty;
    return s / static_cast<double>(report.per_kind.size());
  }
  double m = 0.0;
  for (const auto& k : report.per_kind) m = std::max(m, k.uncertainty);
  return m;
}

/// Reject iff the aggregated uncertainty is strictly above the threshold.
inline Decision decide(const UncertaintyReport& report, const MonitorConfig& config) {
  return aggregate_uncertainty(report, config.rule) > config.threshold ? Decision::Reject
                                                                       : Decision::Accept;
}

/// Sliding-window scope-compliance monitor for one stream. push() calls must
/// be serialised; the reference and estimators are shared read-only.
class Monitor {
 public:
  Monitor(MonitorConfig config, std::shared_ptr<const SortedColumns> reference,
          std::map<DistanceKind, Scue> scues, EsParams es = {})
      : config_(std::move(config)),
        reference_(std::move(reference)),
        scues_(std::move(scues)),
        es_(std::move(es)) {
    config_.validate();
    if (!reference_) throw Error(ErrorCode::kInvalidArgument, "monitor: no reference");
    for (auto k : config_.kinds) {
      if (!scues_.count(k))
        throw Error(ErrorCode::kInvalidArgument,
                    "monitor: no estimator for kind " + std::string(to_tag(k)));
    }
    buffer_.assign(config_.window * dim(), 0.0);
  }

  const MonitorConfig& config() const noexcept { return config_; }
  std::size_t dim() const noexcept { return reference_->cols(); }
  std::size_t samples_seen() const noexcept { return seen_; }

  /// Appends one sample; returns a report when a window boundary is reached.
  std::optional<UncertaintyReport> push(std::span<const double> sample) {
    if (sample.size() != dim())
      throw Error(ErrorCode::kDimensionMismatch,
                  "monitor: sample has " + std::to_string(sample.size()) +
                      " features, expected " + std::to_string(dim()));
    for (double v : sample) {
      if (!std::isfinite(v))
        throw Error(ErrorCode::kNonFiniteValue,
                    "monitor: non-finite value in sample " + std::to_string(seen_));
    }
    std::copy(sample.begin(), sample.end(), buffer_.begin() + (seen_ % config_.window) * dim());
    ++seen_;
    if (seen_ < config_.window) return std::nullopt;
    if (++since_report_ < config_.stride && seen_ > config_.window) return std::nullopt;
    since_report_ = 0;
    return evaluate_window();
  }

 private:
  UncertaintyReport evaluate_window() {
    const std::size_t w = config_.window;
    const std::size_t d = dim();
    std::vector<double> data(w * d);
    // Oldest sample first.
    for (std::size_t i = 0; i < w; ++i) {
      const std::size_t slot = (seen_ + i) % w;
      std::copy_n(buffer_.begin() + slot * d, d, data.begin() + i * d);
    }
    const FeatureMatrix window(w, d, std::move(data));

    UncertaintyReport report;
    report.window_id = next_id_++;
    report.first_index = seen_ - w;
    report.last_index = seen_ - 1;
    for (auto k : config_.kinds) {
      const double value = sdd(*reference_, window, k, es_).aggregate;
      report.per_kind.push_back({k, value, evaluate_scue(scues_.at(k), value)});
    }
    report.decision = decide(report, config_);
    return report;
  }

  MonitorConfig config_;
  std::shared_ptr<const SortedColumns> reference_;
  std::map<DistanceKind, Scue> scues_;
  EsParams es_;
  std::vector<double> buffer_;
  std::size_t seen_ = 0;
  std::size_t since_report_ = 0;
  std::size_t next_id_ = 0;
};

/// 1 - fraction of correct labels among stream samples [first, last].
inline double window_inaccuracy(std::span<const std::uint8_t> correct, std::size_t first,
                                std::size_t last) {
  if (last >= correct.size() || first > last)
    throw Error(ErrorCode::kInvalidArgument, "window_inaccuracy: index range outside labels");
  std::size_t ok = 0;
  for (std::size_t i = first; i <= last; ++i) ok += correct[i];
  return 1.0 - static_cast<double>(ok) / static_cast<double>(last - first + 1);
}

struct ScoredReport {
  UncertaintyReport report;
  double true_inaccuracy = 0.0;
};

struct ConfusionSummary {
  std::size_t rejected = 0;
  std::size_t false_rejects = 0;  // rejected with true inaccuracy < threshold
  std::size_t missed = 0;         // accepted with true inaccuracy > threshold
  std::size_t total = 0;
  bool operator==(const ConfusionSummary&) const = default;
};

inline ConfusionSummary score_confusion(std::span<const ScoredReport> reports, double threshold) {
  ConfusionSummary s;
  for (const auto& r : reports) {
    if (!(r.true_inaccuracy >= 0.0 && r.true_inaccuracy <= 1.0))
      throw Error(ErrorCode::kInvalidArgument, "score_confusion: inaccuracy outside [0,1]");
    ++s.total;
    if (r.report.decision == Decision::Reject) {
      ++s.rejected;
      if (r.true_inaccuracy < threshold) ++s.false_rejects;
    } else if (r.true_inaccuracy > threshold) {
      ++s.missed;
    }
  }
  return s;
}

/// One row of the uncertainty-threshold / accuracy cut-off curve. The cut-off
/// fields are empty when every window is rejected.
struct SweepRow {
  double threshold = 0.0;
  std::optional<double> cutoff;         // minimum true accuracy among accepted windows
  std::optional<double> mean_accuracy;  // mean true accuracy among accepted windows
  std::size_t rejected = 0;
};

inline std::vector<SweepRow> threshold_sweep(std::span<const ScoredReport> reports,
                                             std::span<const double> thresholds,
                                             AggregateRule rule = AggregateRule::PerKind) {
  std::vector<SweepRow> rows;
  rows.reserve(thresholds.size());
  for (double t : thresholds) {
    if (!(t >= 0.0 && t <= 1.0))
      throw Error(ErrorCode::kInvalidArgument, "threshold_sweep: thresholds must lie in [0,1]");
    SweepRow row;
    row.threshold = t;
    double sum = 0.0;
    std::size_t accepted = 0;
    for (const auto& r : reports) {
      if (aggregate_uncertainty(r.report, rule) > t) {
        ++row.rejected;
        continue;
      }
      const double acc = 1.0 - r.true_inaccuracy;
      row.cutoff = row.cutoff ? std::min(*row.cutoff, acc) : acc;
      sum += acc;
      ++accepted;
    }
    if (accepted) row.mean_accuracy = sum / static_cast<double>(accepted);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace sddmon
