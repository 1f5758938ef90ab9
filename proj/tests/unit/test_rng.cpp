#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "seqcp/rng.hpp"

using seqcp::Rng;

// Reference values from an independent xoshiro256** / splitmix64 implementation.
TEST(Rng, KnownOutputs) {
  Rng a(42);
  EXPECT_EQ(a.next(), 0x15780b2e0c2ec716ULL);
  EXPECT_EQ(a.next(), 0x6104d9866d113a7eULL);
  EXPECT_EQ(a.next(), 0xae17533239e499a1ULL);

  Rng b(7);
  EXPECT_EQ(b.uniform(), 0.7005764821796896);
  EXPECT_EQ(b.uniform(), 0.2787512294737843);

  Rng c(7);
  EXPECT_NEAR(c.normal(), -0.15157274547711355, 1e-15);
}

TEST(Rng, SameSeedSameStream) {
  Rng a(123), b(123), c(124);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next();
    EXPECT_EQ(x, b.next());
    differs |= x != c.next();
  }
  EXPECT_TRUE(differs);
}

TEST(Rng, UniformRanges) {
  Rng r(1);
  for (int i = 0; i < 100000; ++i) {
    const double u = r.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    const double v = r.uniform_open0();
    ASSERT_GT(v, 0.0);
    ASSERT_LE(v, 1.0);
  }
}

TEST(Rng, NormalMoments) {
  Rng r(2);
  const int n = 200000;
  double s = 0.0, ss = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = r.normal();
    s += z;
    ss += z * z;
  }
  EXPECT_NEAR(s / n, 0.0, 0.01);
  EXPECT_NEAR(ss / n, 1.0, 0.015);
}

TEST(Rng, BelowIsUniform) {
  Rng r(3);
  std::vector<int> counts(7, 0);
  const int n = 70000;
  for (int i = 0; i < n; ++i) {
    const auto k = r.below(7);
    ASSERT_LT(k, 7u);
    ++counts[k];
  }
  for (int c : counts) EXPECT_NEAR(c, n / 7, 400);
  EXPECT_EQ(r.below(1), 0u);
}

TEST(Rng, BernoulliFrequency) {
  Rng r(4);
  int hits = 0;
  for (int i = 0; i < 100000; ++i) hits += r.bernoulli(0.3);
  EXPECT_NEAR(hits / 100000.0, 0.3, 0.006);
}

class PoissonMoments : public ::testing::TestWithParam<double> {};

// Covers both the multiplication branch (mean < 10) and the PTRS branch.
TEST_P(PoissonMoments, MeanAndVariance) {
  const double mean = GetParam();
  Rng r(5);
  const int n = 100000;
  double s = 0.0, ss = 0.0;
  for (int i = 0; i < n; ++i) {
    const double k = static_cast<double>(r.poisson(mean));
    s += k;
    ss += k * k;
  }
  const double m = s / n;
  const double v = ss / n - m * m;
  EXPECT_NEAR(m, mean, 5.0 * std::sqrt(mean / n) + 1e-3);
  // Relative standard error of the sample variance is about sqrt((1 / mean + 2) / n).
  EXPECT_NEAR(v / mean, 1.0, 4.0 * std::sqrt((1.0 / mean + 2.0) / n));
}

INSTANTIATE_TEST_SUITE_P(Means, PoissonMoments, ::testing::Values(0.05, 1.0, 4.5, 9.99, 10.0, 37.0, 400.0));

TEST(Rng, PoissonZeroMean) {
  Rng r(6);
  EXPECT_EQ(r.poisson(0.0), 0u);
}
