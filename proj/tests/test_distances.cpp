#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "sddmon/distances.hpp"
#include "sddmon/sdd.hpp"

using namespace sddmon;

namespace {

SortedSample S(std::vector<double> v) { return SortedSample::make(v); }

bool degenerate(const std::vector<double>& a, const std::vector<double>& b) {
  return oracle::distinct(a, b).size() < 2;
}

}  // namespace

TEST(Ks, Examples) {
  EXPECT_EQ(ks_distance(S({1, 2, 3}), S({1, 2, 3})), 0.0);
  EXPECT_EQ(ks_distance(S({1, 2, 3, 4}), S({5, 6, 7, 8})), 1.0);
  EXPECT_EQ(ks_distance(S({1, 2}), S({1, 3})), 0.5);
}

TEST(Cvm, IdenticalIsZero) { EXPECT_EQ(cvm_distance(S({4, 1, 7}), S({1, 4, 7})), 0.0); }

// The statistic depends on the data only through the pooled ranks, so two
// disjoint point masses give the same value however far apart they are.
TEST(Cvm, RankInvariantForPointMasses) {
  const std::vector<double> zeros(50, 0.0), ones(50, 1.0), tenths(50, 0.1);
  const double far = cvm_distance(S(zeros), S(ones));
  const double near = cvm_distance(S(zeros), S(tenths));
  EXPECT_DOUBLE_EQ(far, near);
  EXPECT_DOUBLE_EQ(far, 0.25 * 50.0);  // nm/N^2 * 50 points with |dF| = 1
  EXPECT_GT(far, cvm_distance(S(zeros), S(zeros)));
}

TEST(Ad, IdenticalIsZeroAndDegenerateThrows) {
  EXPECT_NEAR(ad_distance(S({1, 2, 5, 9}), S({9, 5, 2, 1})), 0.0, 1e-12);
  try {
    ad_distance(S({2, 2}), S({2, 2, 2}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDegenerateSample);
  }
}

TEST(Wasserstein, Examples) {
  EXPECT_DOUBLE_EQ(wasserstein_distance(S({0}), S({1})), 1.0);
  EXPECT_EQ(wasserstein_distance(S({3, 1}), S({1, 3})), 0.0);
  EXPECT_DOUBLE_EQ(wasserstein_distance(S({0, 0}), S({1, 3})), 2.0);
}

TEST(Dts, Examples) {
  EXPECT_EQ(dts_distance(S({1, 2, 3}), S({1, 2, 3})), 0.0);
  EXPECT_GT(dts_distance(S({1, 3}), S({2, 4})), 0.0);
  EXPECT_THROW(dts_distance(S({1}), S({1})), Error);
}

TEST(Distances, MatchBruteForceOracles) {
  std::mt19937_64 eng(20240601);
  std::uniform_int_distribution<std::size_t> size(2, 30);
  for (int rep = 0; rep < 300; ++rep) {
    const bool ties = rep % 2 == 0;
    const auto a = ties ? oracle::small_ints(eng, size(eng), 6) : oracle::normal(eng, size(eng));
    const auto b = ties ? oracle::small_ints(eng, size(eng), 6) : oracle::normal(eng, size(eng), 0.3);
    const auto sa = S(a), sb = S(b);
    EXPECT_NEAR(ks_distance(sa, sb), oracle::ks(a, b), 1e-10);
    EXPECT_NEAR(cvm_distance(sa, sb), oracle::cvm(a, b), 1e-10);
    EXPECT_NEAR(wasserstein_distance(sa, sb), oracle::ws(a, b), 1e-10);
    if (!degenerate(a, b)) {
      EXPECT_NEAR(ad_distance(sa, sb), oracle::ad(a, b), 1e-10);
      EXPECT_NEAR(dts_distance(sa, sb), oracle::dts(a, b), 1e-10);
    }
  }
}

TEST(Distances, PooledPointsMatchDenseGrid) {
  std::mt19937_64 eng(7);
  for (int rep = 0; rep < 200; ++rep) {
    const auto a = oracle::small_ints(eng, 1 + rep % 12, 10);
    const auto b = oracle::small_ints(eng, 1 + (rep * 7) % 15, 10);
    EXPECT_NEAR(ks_distance(S(a), S(b)), oracle::ks_grid(a, b, -1.0, 11.0, 0.25), 1e-12);
    EXPECT_NEAR(wasserstein_distance(S(a), S(b)), oracle::ws_grid(a, b, -1.0, 11.0, 0.25), 1e-10);
  }
}

TEST(Distances, SymmetryIdentityAndKsBound) {
  std::mt19937_64 eng(11);
  for (int rep = 0; rep < 200; ++rep) {
    const auto a = oracle::normal(eng, 3 + rep % 20);
    const auto b = oracle::normal(eng, 4 + rep % 17, 0.5, 2.0);
    const auto sa = S(a), sb = S(b);
    for (auto kind : kEcdfKinds) {
      EXPECT_EQ(univariate_distance(sa, sb, kind), univariate_distance(sb, sa, kind))
          << to_tag(kind);
      EXPECT_NEAR(univariate_distance(sa, sa, kind), 0.0, 1e-12) << to_tag(kind);
      EXPECT_GE(univariate_distance(sa, sb, kind), 0.0);
    }
    const double d = ks_distance(sa, sb);
    EXPECT_GE(d, 0.0);
    EXPECT_LE(d, 1.0);
  }
}

// The gap between a P-vs-Q distance and a P-vs-P distance must not shrink as
// the sample size doubles (up to 5 % Monte Carlo slack).
TEST(Distances, SeparationGrowsWithSampleSize) {
  const std::vector<std::size_t> sizes{10, 20, 40, 80, 160};
  for (auto kind : kAllKinds) {
    std::vector<double> gaps;
    for (auto n : sizes) {
      std::mt19937_64 eng(1000 + n);
      double null_sum = 0.0, alt_sum = 0.0;
      for (int rep = 0; rep < 100; ++rep) {
        const auto p1 = S(oracle::normal(eng, n));
        const auto p2 = S(oracle::normal(eng, n));
        const auto q = S(oracle::normal(eng, n, 1.0));
        null_sum += univariate_distance(p1, p2, kind);
        alt_sum += univariate_distance(p1, q, kind);
      }
      gaps.push_back((alt_sum - null_sum) / 100.0);
    }
    for (std::size_t i = 1; i < gaps.size(); ++i)
      EXPECT_GE(gaps[i], gaps[i - 1] - 0.05 * std::abs(gaps.back())) << to_tag(kind) << " at n=" << sizes[i];
  }
}
