#include "recurtune/cost.h"

#include <gtest/gtest.h>

#include "recurtune/errors.h"
#include "recurtune/generator.h"
#include "recurtune/rng.h"
#include "support/oracles.h"

namespace recurtune {
namespace {

using testing::Dominates;
using testing::NestedLoopOptimum;
using testing::Point;

TEST(BlendedCostTest, Examples) {
  EXPECT_DOUBLE_EQ(BlendedCost(1000, 10, 0.5, 250), 1750);
  EXPECT_DOUBLE_EQ(BlendedCost(1000, 10, 1.0, 250), 1000);
  EXPECT_DOUBLE_EQ(BlendedCost(1000, 10, 0.0, 250), 2500);
}

TEST(BlendedCostTest, LinearInEta) {
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) {
    const double e = rng.Uniform() * 1e6, t = rng.Uniform() * 1e4;
    const double eta = rng.Uniform();
    const double p = 100 + rng.Uniform() * 300;
    const double lhs = BlendedCost(e, t, eta, p);
    const double rhs = eta * BlendedCost(e, t, 1, p) + (1 - eta) * BlendedCost(e, t, 0, p);
    EXPECT_TRUE(testing::RelClose(lhs, rhs, 1e-15)) << lhs << " vs " << rhs;
  }
}

TEST(EpochCostTest, Examples) {
  const PowerProfile p200{32, 250, 200, 0.01, 0};
  EXPECT_NEAR(EpochCost(p200, 1.0, 250), 20000, 1e-9);
  EXPECT_NEAR(EpochCost(p200, 0.0, 250), 25000, 1e-9);
  const PowerProfile p130{32, 150, 130, 0.010, 0};
  EXPECT_NEAR(EpochCost(p130, 0.5, 250), 19000, 1e-9);
}

TEST(JobCostTest, Examples) {
  EXPECT_DOUBLE_EQ(JobCost(10, 100), 1000);
  EXPECT_DOUBLE_EQ(JobCost(0, 100), 0);
  EXPECT_DOUBLE_EQ(JobCost(37, 19000), 703000);
}

TEST(RegretTest, Examples) {
  EXPECT_DOUBLE_EQ(Regret(1000, 900), 100);
  EXPECT_DOUBLE_EQ(Regret(900, 900), 0);
  const std::vector<double> r = {100, 0, 0};
  EXPECT_EQ(CumulativeRegret(r), (std::vector<double>{100, 100, 100}));
}

TEST(RegretTest, BelowOptimumSignalsBrokenOracle) {
  EXPECT_THROW(Regret(800, 900), StateError);
  // Rounding noise is tolerated and clamped.
  EXPECT_EQ(Regret(900 - 1e-10, 900), 0.0);
}

TEST(RegretTest, CumulativeIsNonDecreasing) {
  Rng rng(2);
  std::vector<double> r;
  for (int i = 0; i < 100; ++i) r.push_back(Regret(900 + rng.Uniform() * 100, 900));
  const auto c = CumulativeRegret(r);
  for (std::size_t i = 1; i < c.size(); ++i) EXPECT_GE(c[i], c[i - 1]);
}

TEST(MeanConvergedEpochsTest, ExcludesFailuresAndOtherSlices) {
  const std::vector<TrainingRecord> records = {
      {16, 0, 10, 0}, {16, 1, 14, 0}, {16, 2, std::nullopt, 0},
      {32, 0, std::nullopt, 0}, {16, 0, 100, 1}};
  const auto m = MeanConvergedEpochs(records, 0);
  ASSERT_EQ(m.size(), 1u);
  EXPECT_DOUBLE_EQ(m.at(16), 12);
  EXPECT_DOUBLE_EQ(MeanConvergedEpochs(records, 1).at(16), 100);
}

TEST(BruteForceOptimumTest, Singleton) {
  const std::vector<PowerProfile> profiles = {{32, 100, 90, 0.01, 0}};
  const auto opt = BruteForceOptimum({{32, 10.0}}, profiles, 0.5, 250);
  EXPECT_EQ(opt.config, (Config{32, 100}));
}

TEST(BruteForceOptimumTest, DominantBatchSizeWithItsBestLimit) {
  // b=16 needs half the epochs of b=32 at identical profiles.
  std::vector<PowerProfile> profiles;
  const std::vector<double> avg = {90, 130, 170, 210}, tput = {0.008, 0.010, 0.011, 0.0115};
  const std::vector<double> limits = {100, 150, 200, 250};
  for (int b : {16, 32}) {
    for (std::size_t i = 0; i < 4; ++i) profiles.push_back({b, limits[i], avg[i], tput[i], 0});
  }
  const auto opt = BruteForceOptimum({{16, 10.0}, {32, 20.0}}, profiles, 0.5, 250);
  EXPECT_EQ(opt.config, (Config{16, 150}));
  EXPECT_NEAR(opt.cost, 190000, 1e-6);
}

TEST(BruteForceOptimumTest, TiesGoToSmallerBatchThenPower) {
  const std::vector<PowerProfile> profiles = {
      {32, 100, 100, 0.01, 0}, {32, 150, 100, 0.01, 0}, {16, 150, 100, 0.01, 0}};
  const auto opt = BruteForceOptimum({{16, 10.0}, {32, 10.0}}, profiles, 1.0, 250);
  EXPECT_EQ(opt.config, (Config{16, 150}));
  const auto opt32 = BruteForceOptimum({{32, 10.0}}, profiles, 1.0, 250);
  EXPECT_EQ(opt32.config, (Config{32, 100}));
}

TEST(BruteForceOptimumTest, NothingConverges) {
  const std::vector<PowerProfile> profiles = {{32, 100, 90, 0.01, 0}};
  EXPECT_THROW(BruteForceOptimum({}, profiles, 0.5, 250), StateError);
}

TEST(BruteForceOptimumTest, AgreesWithNestedLoopOracle) {
  // A small hand-built grid plus many random generator draws.
  Rng pick(17);
  for (int trial = 0; trial < 40; ++trial) {
    GeneratorParams g = Preset("balanced-6x5");
    if (trial == 0) {
      g.batch_sizes = {16, 32, 48};
      g.power_limits = {100, 125, 150, 175, 200, 225, 250};
      g.default_batch_size = 32;
    }
    g.noise = 0.1;
    g.curvature = 0.2 + pick.Uniform();
    const auto bundle = GenerateSynthetic(g, 100 + trial);
    const std::vector<TrainingRecord> records(bundle.training().begin(), bundle.training().end());
    const std::vector<PowerProfile> profiles(bundle.power().begin(), bundle.power().end());
    for (double eta : {0.0, 0.25, 0.5, 0.8, 1.0}) {
      const auto opt =
          BruteForceOptimum(MeanConvergedEpochs(bundle.training()), bundle.power(), eta, 250);
      const auto ref = NestedLoopOptimum(g.batch_sizes, g.power_limits,
                                         testing::NaiveMeanEpochs(records, 0), profiles, eta, 250);
      ASSERT_TRUE(ref);
      EXPECT_EQ(opt.config.batch_size, ref->batch_size);
      EXPECT_EQ(opt.config.power_limit, ref->power_limit);
      EXPECT_EQ(opt.cost, ref->cost);
    }
  }
}

TEST(ParetoFrontTest, DropsDominatedPoint) {
  const std::vector<ParetoPoint> pts = {
      {{8, 100}, 10, 100}, {{16, 100}, 12, 90}, {{32, 100}, 11, 120}};
  const auto front = ParetoFront(pts);
  ASSERT_EQ(front.size(), 2u);
  EXPECT_EQ(front[0].tta, 10);
  EXPECT_EQ(front[1].tta, 12);
}

TEST(ParetoFrontTest, SingletonAndEmpty) {
  const std::vector<ParetoPoint> one = {{{8, 100}, 10, 100}};
  EXPECT_EQ(ParetoFront(one), one);
  EXPECT_TRUE(ParetoFront({}).empty());
}

TEST(ParetoFrontTest, DuplicatesKeepFirstByConfig) {
  const std::vector<ParetoPoint> pts = {{{16, 100}, 10, 100}, {{8, 150}, 10, 100}};
  const auto front = ParetoFront(pts);
  ASSERT_EQ(front.size(), 1u);
  EXPECT_EQ(front[0].config, (Config{8, 150}));
}

TEST(ParetoFrontTest, MatchesPairwiseDominanceOracle) {
  Rng rng(23);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<ParetoPoint> pts;
    const int n = 1 + static_cast<int>(rng.UniformIndex(30));
    for (int i = 0; i < n; ++i) {
      // Coarse coordinates so ties occur.
      pts.push_back({{8 * (i + 1), 100},
                     1.0 + static_cast<double>(rng.UniformIndex(10)),
                     1.0 + static_cast<double>(rng.UniformIndex(10))});
    }
    const auto front = ParetoFront(pts);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      bool dominated = false;
      bool earlier_duplicate = false;
      for (std::size_t j = 0; j < pts.size(); ++j) {
        const Point a{pts[j].tta, pts[j].eta_energy}, b{pts[i].tta, pts[i].eta_energy};
        if (Dominates(a, b)) dominated = true;
        if (j < i && a.x == b.x && a.y == b.y) earlier_duplicate = true;
      }
      const bool in_front = std::find(front.begin(), front.end(), pts[i]) != front.end();
      EXPECT_EQ(in_front, !dominated && !earlier_duplicate);
    }
    for (std::size_t i = 1; i < front.size(); ++i) EXPECT_LT(front[i - 1].tta, front[i].tta);
  }
}

TEST(EtaSweepTest, EndpointsAndFrontMembership) {
  const auto bundle = GenerateSynthetic(Preset("deepspeech2-like"), 3);
  const auto expected = MeanConvergedEpochs(bundle.training());
  const auto grid = GridPoints(expected, bundle.power());
  const std::vector<double> etas = {0.0, 0.1, 0.3, 0.5, 0.7, 0.9, 1.0};
  const auto rows = EtaSweep(expected, bundle.power(), etas, 250);
  ASSERT_EQ(rows.size(), etas.size());
  auto min_tta = *std::min_element(grid.begin(), grid.end(),
                                   [](auto& a, auto& b) { return a.tta < b.tta; });
  auto min_eta = *std::min_element(grid.begin(), grid.end(), [](auto& a, auto& b) {
    return a.eta_energy < b.eta_energy;
  });
  EXPECT_EQ(rows.front().config, min_tta.config);
  EXPECT_EQ(rows.back().config, min_eta.config);
  for (const auto& r : rows) {
    if (r.eta > 0 && r.eta < 1) EXPECT_TRUE(r.on_front) << r.eta;
  }
}

TEST(AvgPowerBandTest, MinAndMax) {
  const std::vector<PowerProfile> profiles = {
      {8, 100, 90, 0.01, 0}, {8, 250, 210, 0.02, 0}, {16, 150, 120, 0.01, 0}};
  const auto band = AvgPowerBand(profiles);
  EXPECT_EQ(band.min_avg_power, 90);
  EXPECT_EQ(band.max_avg_power, 210);
}

}  // namespace
}  // namespace recurtune
