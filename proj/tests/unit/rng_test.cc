#include "recurtune/rng.h"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

namespace recurtune {
namespace {

TEST(RngTest, EngineMatchesStandardSequence) {
  // The standard pins the 10000th output of a default-seeded mt19937_64.
  Rng rng(5489u);
  std::uint64_t x = 0;
  for (int i = 0; i < 10000; ++i) x = rng.NextU64();
  EXPECT_EQ(x, 9981545732273789042ull);
}

TEST(RngTest, SameSeedSameStream) {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) {
    EXPECT_EQ(a.Normal(), b.Normal());
    EXPECT_EQ(a.Uniform(), b.Uniform());
    EXPECT_EQ(a.UniformIndex(7), b.UniformIndex(7));
  }
}

TEST(RngTest, UniformInUnitInterval) {
  Rng rng(1);
  double sum = 0;
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.Uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / 100000, 0.5, 0.01);
}

TEST(RngTest, NormalMoments) {
  Rng rng(3);
  const int n = 200000;
  double sum = 0, sq = 0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.Normal();
    ASSERT_TRUE(std::isfinite(z));
    sum += z;
    sq += z * z;
  }
  const double mean = sum / n;
  EXPECT_NEAR(mean, 0.0, 0.01);
  EXPECT_NEAR(sq / n - mean * mean, 1.0, 0.02);
}

TEST(RngTest, NormalConsumesTwoEngineOutputs) {
  Rng a(9), b(9);
  a.Normal();
  b.NextU64();
  b.NextU64();
  EXPECT_EQ(a.NextU64(), b.NextU64());
}

TEST(RngTest, ScaledNormal) {
  Rng a(11), b(11);
  EXPECT_DOUBLE_EQ(a.Normal(10.0, 2.0), 10.0 + 2.0 * b.Normal());
}

TEST(RngTest, UniformIndexCoversRangeEvenly) {
  Rng rng(5);
  std::vector<int> counts(6, 0);
  const int n = 60000;
  for (int i = 0; i < n; ++i) {
    const auto k = rng.UniformIndex(6);
    ASSERT_LT(k, 6u);
    ++counts[k];
  }
  for (int c : counts) EXPECT_NEAR(c, n / 6, 500);
}

TEST(RngTest, UniformIndexRejectsZero) {
  Rng rng(5);
  EXPECT_THROW(rng.UniformIndex(0), std::invalid_argument);
  EXPECT_EQ(rng.UniformIndex(1), 0u);
}

}  // namespace
}  // namespace recurtune
