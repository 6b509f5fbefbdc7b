#include <gtest/gtest.h>

#include <random>

#include "commands.hpp"
#include "oracles.hpp"
#include "sddmon/monitor.hpp"

using namespace sddmon;

namespace {

Scue identity_scue(DistanceKind k, double hi = 1.0) {
  Scue s;
  s.kind = k;
  s.coeffs = {0.0, 1.0 / hi, 0.0};
  s.sdd_min = 0.0;
  s.sdd_max = hi;
  return s;
}

UncertaintyReport report_with(std::vector<double> us) {
  UncertaintyReport r;
  for (std::size_t i = 0; i < us.size(); ++i)
    r.per_kind.push_back({kAllKinds[i], 0.0, us[i]});
  return r;
}

struct Fixture {
  FeatureMatrix ref_raw;
  FeatureMatrix cal_raw;
  ScopeModel model;
};

const Fixture& calibrated() {
  static const Fixture f = [] {
    std::mt19937_64 eng(2024);
    Fixture fx;
    fx.ref_raw = FeatureMatrix(1000, 5, oracle::normal(eng, 5000));
    std::vector<double> cal = oracle::normal(eng, 1000 * 5);
    const auto bad = oracle::normal(eng, 1000 * 5, 3.0);
    cal.insert(cal.end(), bad.begin(), bad.end());
    std::vector<std::uint8_t> lab(2000, 0);
    std::fill(lab.begin(), lab.begin() + 1000, 1);
    fx.cal_raw = FeatureMatrix(2000, 5, std::move(cal), std::move(lab));
    std::map<DistanceKind, FitForm> forms;
    for (auto k : kAllKinds) forms[k] = default_form(k);
    fx.model = cli::calibrate(fx.cal_raw, fx.ref_raw, 50, 20, forms, 0.85, RngSeed{1}).model;
    return fx;
  }();
  return f;
}

Monitor make_monitor(const ScopeModel& m, std::size_t stride) {
  MonitorConfig cfg;
  cfg.window = m.window;
  cfg.stride = stride;
  for (const auto& [k, s] : m.scues) cfg.kinds.push_back(k);
  return Monitor(cfg, std::make_shared<const SortedColumns>(m.reference), m.scues, m.es);
}

}  // namespace

TEST(Monitor, TumblingWindowsReportEveryWindow) {
  std::mt19937_64 eng(1);
  const FeatureMatrix ref(200, 2, oracle::normal(eng, 400));
  MonitorConfig cfg;
  cfg.window = 50;
  cfg.stride = 50;
  cfg.kinds = {DistanceKind::KolmogorovSmirnov};
  Monitor mon(cfg, std::make_shared<const SortedColumns>(ref),
              {{DistanceKind::KolmogorovSmirnov, identity_scue(DistanceKind::KolmogorovSmirnov)}});
  std::vector<std::size_t> at;
  std::vector<std::size_t> ids;
  for (std::size_t i = 1; i <= 160; ++i) {
    const auto s = oracle::normal(eng, 2);
    if (auto r = mon.push(s)) {
      at.push_back(i);
      ids.push_back(r->window_id);
      EXPECT_EQ(r->last_index, i - 1);
      EXPECT_EQ(r->first_index, i - 50);
    }
  }
  EXPECT_EQ(at, (std::vector<std::size_t>{50, 100, 150}));
  EXPECT_EQ(ids, (std::vector<std::size_t>{0, 1, 2}));
}

TEST(Monitor, SlidingWindowsReportEverySample) {
  std::mt19937_64 eng(2);
  const FeatureMatrix ref(200, 1, oracle::normal(eng, 200));
  MonitorConfig cfg;
  cfg.window = 50;
  cfg.stride = 1;
  cfg.kinds = {DistanceKind::Wasserstein};
  Monitor mon(cfg, std::make_shared<const SortedColumns>(ref),
              {{DistanceKind::Wasserstein, identity_scue(DistanceKind::Wasserstein)}});
  std::vector<std::size_t> at;
  for (std::size_t i = 1; i <= 55; ++i)
    if (mon.push(oracle::normal(eng, 1))) at.push_back(i);
  EXPECT_EQ(at, (std::vector<std::size_t>{50, 51, 52, 53, 54, 55}));
}

TEST(Monitor, WindowContentIsTheMostRecentSamples) {
  // Window SDD must equal a direct sdd() over the last `window` samples.
  std::mt19937_64 eng(3);
  const FeatureMatrix ref(100, 2, oracle::normal(eng, 200));
  MonitorConfig cfg;
  cfg.window = 20;
  cfg.stride = 7;
  cfg.kinds = {DistanceKind::CramerVonMises};
  Monitor mon(cfg, std::make_shared<const SortedColumns>(ref),
              {{DistanceKind::CramerVonMises, identity_scue(DistanceKind::CramerVonMises, 5.0)}});
  std::vector<std::vector<double>> history;
  for (int i = 0; i < 80; ++i) {
    history.push_back(oracle::normal(eng, 2, 0.01 * i));
    if (auto r = mon.push(history.back())) {
      std::vector<std::vector<double>> win(history.end() - 20, history.end());
      const auto direct = sdd(ref, FeatureMatrix::from_rows(win), DistanceKind::CramerVonMises);
      EXPECT_EQ(r->per_kind[0].sdd, direct.aggregate);
    }
  }
}

TEST(Monitor, InScopeWindowHasLowUncertainty) {
  const auto& fx = calibrated();
  std::mt19937_64 eng(99);
  const FeatureMatrix stream(50, 5, oracle::normal(eng, 250));
  const auto projected = pca_transform(fx.model.pca, stream);
  auto mon = make_monitor(fx.model, 50);
  std::optional<UncertaintyReport> rep;
  for (std::size_t r = 0; r < projected.rows(); ++r) rep = mon.push(projected.row(r));
  ASSERT_TRUE(rep.has_value());
  ASSERT_EQ(rep->per_kind.size(), 6u);
  for (const auto& k : rep->per_kind) EXPECT_LE(k.uncertainty, 0.2) << to_tag(k.kind);
  EXPECT_EQ(rep->decision, Decision::Accept);
}

TEST(Monitor, ReplayIsBitIdenticalAndDecisionsConsistent) {
  const auto& fx = calibrated();
  std::mt19937_64 eng(5);
  std::vector<double> data = oracle::normal(eng, 300 * 5, 1.0);
  const auto projected = pca_transform(fx.model.pca, FeatureMatrix(300, 5, data));
  auto run = [&] {
    auto mon = make_monitor(fx.model, 25);
    std::vector<UncertaintyReport> out;
    for (std::size_t r = 0; r < projected.rows(); ++r)
      if (auto rep = mon.push(projected.row(r))) out.push_back(*rep);
    return out;
  };
  const auto a = run();
  const auto b = run();
  ASSERT_EQ(a.size(), 11u);
  EXPECT_EQ(a, b);
  MonitorConfig cfg;
  for (const auto& r : a) EXPECT_EQ(r.decision, decide(r, cfg));
}

TEST(Monitor, UncertaintyFollowsOutOfScopeRamp) {
  // Mean over 32 independent ramps per kind, so the slack covers Monte
  // Carlo noise rather than a lucky seed.
  const auto& fx = calibrated();
  std::mt19937_64 eng(8);
  std::normal_distribution<double> nd;
  constexpr int kRamps = 32;
  std::map<DistanceKind, std::vector<double>> series;
  for (int ramp = 0; ramp < kRamps; ++ramp) {
    auto mon = make_monitor(fx.model, 50);
    std::size_t w = 0;
    for (int b = 0; b <= 10; ++b) {
      for (int i = 0; i < 50; ++i) {
        const bool out = i < b * 5;
        std::vector<double> row(5);
        for (auto& v : row) v = nd(eng) + (out ? 3.0 : 0.0);
        const auto z = pca_transform(fx.model.pca, FeatureMatrix::from_rows({row}));
        if (auto rep = mon.push(z.row(0))) {
          for (const auto& k : rep->per_kind) {
            auto& s = series[k.kind];
            s.resize(11, 0.0);
            s[w] += k.uncertainty / kRamps;
          }
          ++w;
        }
      }
    }
  }
  for (const auto& [kind, us] : series) {
    ASSERT_EQ(us.size(), 11u);
    for (std::size_t i = 1; i < us.size(); ++i)
      EXPECT_GE(us[i], us[i - 1] - 0.1) << to_tag(kind) << " window " << i;
    EXPECT_GT(us.back(), us.front()) << to_tag(kind);
  }
}

TEST(Monitor, RejectsWrongDimension) {
  const FeatureMatrix ref(10, 2, std::vector<double>(20, 0.0));
  MonitorConfig cfg;
  cfg.window = 5;
  cfg.stride = 5;
  cfg.kinds = {DistanceKind::KolmogorovSmirnov};
  Monitor mon(cfg, std::make_shared<const SortedColumns>(ref),
              {{DistanceKind::KolmogorovSmirnov, identity_scue(DistanceKind::KolmogorovSmirnov)}});
  const std::vector<double> bad{1.0, 2.0, 3.0};
  try {
    mon.push(bad);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDimensionMismatch);
  }
}

TEST(Monitor, ConfigValidation) {
  const auto ref = std::make_shared<const SortedColumns>(FeatureMatrix::from_rows({{1.0}}));
  MonitorConfig cfg;
  cfg.window = 5;
  cfg.stride = 6;
  cfg.kinds = {DistanceKind::KolmogorovSmirnov};
  std::map<DistanceKind, Scue> sc{{DistanceKind::KolmogorovSmirnov, identity_scue(DistanceKind::KolmogorovSmirnov)}};
  EXPECT_THROW(Monitor(cfg, ref, sc), Error);
  cfg.stride = 5;
  cfg.threshold = 1.5;
  EXPECT_THROW(Monitor(cfg, ref, sc), Error);
  cfg.threshold = 0.5;
  cfg.kinds = {DistanceKind::Dts};
  EXPECT_THROW(Monitor(cfg, ref, sc), Error);
}

TEST(Decide, Examples) {
  MonitorConfig cfg;
  cfg.threshold = 0.5;
  cfg.rule = AggregateRule::MaxOverKinds;
  EXPECT_EQ(decide(report_with({0.7, 0.3}), cfg), Decision::Reject);
  EXPECT_EQ(decide(report_with({0.5, 0.5, 0.5}), cfg), Decision::Accept);
  cfg.rule = AggregateRule::MeanOverKinds;
  EXPECT_EQ(decide(report_with({0.7, 0.3}), cfg), Decision::Accept);
  EXPECT_EQ(decide(report_with({0.7, 0.4}), cfg), Decision::Reject);
  cfg.rule = AggregateRule::PerKind;
  EXPECT_EQ(decide(report_with({0.1, 0.51, 0.2}), cfg), Decision::Reject);
  EXPECT_EQ(decide(report_with({0.1, 0.5, 0.2}), cfg), Decision::Accept);
  EXPECT_EQ(MonitorConfig{}.threshold, 0.5);
  EXPECT_EQ(MonitorConfig{}.rule, AggregateRule::PerKind);
}

TEST(ScoreConfusion, Definitions) {
  auto scored = [](Decision d, double inacc) {
    ScoredReport s;
    s.report.decision = d;
    s.true_inaccuracy = inacc;
    return s;
  };
  std::vector<ScoredReport> rs{scored(Decision::Reject, 0.3), scored(Decision::Accept, 0.8),
                               scored(Decision::Reject, 0.9), scored(Decision::Accept, 0.1),
                               scored(Decision::Reject, 0.5), scored(Decision::Accept, 0.5)};
  const auto c = score_confusion(rs, 0.5);
  EXPECT_EQ(c.rejected, 3u);
  EXPECT_EQ(c.false_rejects, 1u);
  EXPECT_EQ(c.missed, 1u);
  EXPECT_EQ(c.total, 6u);
  EXPECT_THROW(score_confusion(std::vector{scored(Decision::Accept, 1.5)}, 0.5), Error);
}

TEST(ScoreConfusion, CountsPartition) {
  std::mt19937_64 eng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<ScoredReport> rs(30);
    for (auto& r : rs) {
      r.report.decision = u(eng) < 0.5 ? Decision::Reject : Decision::Accept;
      r.true_inaccuracy = std::round(u(eng) * 10.0) / 10.0;  // hits 0.5 exactly sometimes
    }
    const auto c = score_confusion(rs, 0.5);
    std::size_t rej_high = 0, acc_low = 0;
    for (const auto& r : rs) {
      if (r.report.decision == Decision::Reject && r.true_inaccuracy >= 0.5) ++rej_high;
      if (r.report.decision == Decision::Accept && r.true_inaccuracy <= 0.5) ++acc_low;
    }
    EXPECT_EQ(c.rejected, c.false_rejects + rej_high);
    EXPECT_EQ(c.total - c.rejected, c.missed + acc_low);
    EXPECT_LE(c.false_rejects, c.rejected);
    EXPECT_LE(c.missed, c.total - c.rejected);
  }
}

TEST(ThresholdSweep, DegenerateThresholds) {
  std::vector<ScoredReport> rs;
  for (int i = 1; i <= 10; ++i) {
    ScoredReport s;
    s.report = report_with({0.1 * i - 0.05});
    s.true_inaccuracy = 0.1 * i - 0.05;
    rs.push_back(s);
  }
  const std::vector<double> ts{0.0, 1.0};
  const auto rows = threshold_sweep(rs, ts);
  EXPECT_EQ(rows[0].rejected, 10u);
  EXPECT_FALSE(rows[0].cutoff.has_value());
  EXPECT_FALSE(rows[0].mean_accuracy.has_value());
  EXPECT_EQ(rows[1].rejected, 0u);
  EXPECT_NEAR(*rows[1].cutoff, 0.05, 1e-12);
}

TEST(ThresholdSweep, AntiCorrelatedFixtureCrossesAtPointFour) {
  std::vector<ScoredReport> rs;
  for (int i = 0; i <= 20; ++i) {
    ScoredReport s;
    const double acc = i / 20.0;
    s.report = report_with({1.0 - acc});
    s.true_inaccuracy = 1.0 - acc;
    rs.push_back(s);
  }
  std::vector<double> ts;
  for (int i = 0; i <= 10; ++i) ts.push_back(i / 10.0);
  const auto rows = threshold_sweep(rs, ts);
  for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_LE(*rows[i].cutoff, *rows[i - 1].cutoff);
  EXPECT_NEAR(*rows[4].cutoff, 0.6, 1e-12);
  EXPECT_EQ(rows[4].threshold, 0.4);
  EXPECT_GT(*rows[3].cutoff, 0.6);
  EXPECT_LT(*rows[5].cutoff, 0.6);
}

TEST(WindowInaccuracy, CountsMembers) {
  const std::vector<std::uint8_t> lab{1, 1, 0, 0, 1, 0};
  EXPECT_DOUBLE_EQ(window_inaccuracy(lab, 0, 3), 0.5);
  EXPECT_DOUBLE_EQ(window_inaccuracy(lab, 2, 3), 1.0);
  EXPECT_THROW(window_inaccuracy(lab, 3, 6), Error);
}
