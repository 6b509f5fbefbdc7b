#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "sddmon/epps_singleton.hpp"

using namespace sddmon;

namespace {

std::vector<double> fixture_a() {
  std::vector<double> v;
  for (int i = 0; i < 30; ++i) v.push_back(std::sin(1.3 * i) * 2 + 0.1 * i);
  return v;
}
std::vector<double> fixture_b() {
  std::vector<double> v;
  for (int i = 0; i < 40; ++i) v.push_back(std::cos(0.7 * i) * 1.5 + 0.5);
  return v;
}

}  // namespace

TEST(EppsSingleton, DefaultPoints) {
  EsParams p;
  EXPECT_EQ(p.t, (std::vector<double>{0.4, 0.8}));
}

// Frozen from scipy.stats.epps_singleton_2samp (no small-sample correction
// applies at these sizes).
TEST(EppsSingleton, MatchesIndependentImplementation) {
  const auto a = SortedSample::make(fixture_a());
  const auto b = SortedSample::make(fixture_b());
  const auto r = es_statistic(a, b);
  EXPECT_NEAR(r.w2, 10.654236468170556, 1e-9);
  EXPECT_NEAR(r.p_value, 0.030737454341681514, 1e-9);
  EXPECT_EQ(r.dof, 4);
  const auto r3 = es_statistic(a, b, EsParams{{0.3, 0.6, 1.2}});
  EXPECT_NEAR(r3.w2, 14.722650264095279, 1e-9);
  EXPECT_NEAR(r3.p_value, 0.022527104414617045, 1e-9);
  EXPECT_EQ(r3.dof, 6);
}

TEST(EppsSingleton, SameSampleIsZero) {
  std::mt19937_64 eng(5);
  const auto a = SortedSample::make(oracle::normal(eng, 100));
  const auto r = es_statistic(a, a);
  EXPECT_NEAR(r.w2, 0.0, 1e-9);
  EXPECT_NEAR(r.p_value, 1.0, 1e-9);
}

TEST(EppsSingleton, Symmetric) {
  std::mt19937_64 eng(9);
  for (int rep = 0; rep < 50; ++rep) {
    const auto a = SortedSample::make(oracle::normal(eng, 20 + rep));
    const auto b = SortedSample::make(oracle::normal(eng, 30, 0.5, 1.5));
    EXPECT_NEAR(es_statistic(a, b).w2, es_statistic(b, a).w2, 1e-12);
  }
}

TEST(EppsSingleton, Errors) {
  const auto small = SortedSample::make(std::vector<double>{1, 2, 3, 4});
  const auto ok = SortedSample::make(std::vector<double>{1, 2, 3, 4, 5, 6});
  try {
    es_statistic(small, ok);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInsufficientSamples);
  }
  const auto flat = SortedSample::make(std::vector<double>{1, 1, 1, 1, 1, 1, 1});
  try {
    es_statistic(flat, SortedSample::make(std::vector<double>{1, 1, 1, 1, 1, 1, 2}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDegenerateSample);
  }
  EXPECT_THROW(es_statistic(ok, ok, EsParams{{0.4, -1.0}}), Error);
  EXPECT_THROW(es_statistic(ok, ok, EsParams{{}}), Error);
}

TEST(EppsSingleton, NullIsChiSquareFour) {
  std::mt19937_64 eng(123);
  std::vector<double> w;
  for (int rep = 0; rep < 200; ++rep) {
    const auto a = SortedSample::make(oracle::normal(eng, 300));
    const auto b = SortedSample::make(oracle::normal(eng, 300));
    w.push_back(es_statistic(a, b).w2);
  }
  const double d = oracle::one_sample_ks(w, oracle::chi2_4_cdf);
  EXPECT_GT(oracle::kolmogorov_sf(d, w.size()), 0.01);
}

TEST(EppsSingleton, ChiSquareHelpers) {
  EXPECT_NEAR(chi2_sf(3.0, 4), 1.0 - oracle::chi2_4_cdf(3.0), 1e-14);
  EXPECT_EQ(chi2_sf(0.0, 4), 1.0);
  EXPECT_NEAR(chi2_quantile(0.9, 4), 7.779440339734858, 1e-9);
}
