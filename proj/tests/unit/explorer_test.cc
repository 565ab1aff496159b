#include "recurtune/explorer.h"

#include <gtest/gtest.h>

#include <map>
#include <set>

#include "recurtune/errors.h"

namespace recurtune {
namespace {

ExplorerOptions Options(std::vector<int> bs, int b0, double beta = 2.0) {
  ExplorerOptions o;
  o.batch_sizes = std::move(bs);
  o.default_batch_size = b0;
  o.beta = beta;
  return o;
}

CostSample Sample(int recurrence, int b, double cost, bool converged, bool early = false) {
  CostSample s;
  s.recurrence = recurrence;
  s.config = {b, 100};
  s.cost = cost;
  s.converged = converged;
  s.early_stopped = early;
  return s;
}

// Drives the explorer sequentially; `outcome` gives (cost, converged) per b.
std::vector<int> Walk(BatchSizeExplorer& ex, const std::map<int, std::pair<double, bool>>& outcome,
                      int steps, int& t, Rng& rng) {
  std::vector<int> order;
  for (int i = 0; i < steps; ++i) {
    const auto issued = ex.Issue(t, rng);
    order.push_back(issued.batch_size);
    const auto [cost, ok] = outcome.at(issued.batch_size);
    ex.ReportResult(Sample(t, issued.batch_size, cost, ok));
    ++t;
  }
  return order;
}

TEST(ExplorerTest, FreshStateStartsAtDefault) {
  BatchSizeExplorer ex(Options({8, 16, 32, 64, 128}, 32));
  Rng rng(1);
  EXPECT_EQ(ex.NextBatchSize(rng), 32);
  const auto s = ex.state();
  EXPECT_EQ(s.phase, Phase::kPruning);
  EXPECT_EQ(s.round, 1);
  EXPECT_EQ(s.current_default, 32);
  EXPECT_EQ(s.pending_order, (std::vector<int>{32, 16, 8, 64, 128}));
  EXPECT_FALSE(s.min_cost);
}

TEST(ExplorerTest, RoundOneOrderAndSurvivors) {
  BatchSizeExplorer ex(Options({8, 16, 32, 64, 128}, 32));
  Rng rng(1);
  int t = 0;
  const std::map<int, std::pair<double, bool>> outcome = {
      {8, {500, false}}, {16, {1200, true}}, {32, {1000, true}}, {64, {1100, true}},
      {128, {900, false}}};
  EXPECT_EQ(Walk(ex, outcome, 5, t, rng), (std::vector<int>{32, 16, 8, 64, 128}));
  const auto s = ex.state();
  EXPECT_EQ(s.round, 2);
  // Round 2 restarts from the cheapest survivor and only walks survivors.
  EXPECT_EQ(s.current_default, 32);
  EXPECT_EQ(s.pending_order, (std::vector<int>{32, 16, 64}));
}

TEST(ExplorerTest, RoundTwoStartsAtCheapestSurvivorThenSamples) {
  BatchSizeExplorer ex(Options({8, 16, 32, 64, 128}, 32));
  Rng rng(1);
  int t = 0;
  const std::map<int, std::pair<double, bool>> outcome = {
      {8, {2500, false}}, {16, {900, true}}, {32, {1000, true}}, {64, {1100, true}},
      {128, {3000, false}}};
  Walk(ex, outcome, 5, t, rng);
  EXPECT_EQ(ex.state().current_default, 16);
  EXPECT_EQ(Walk(ex, outcome, 3, t, rng), (std::vector<int>{16, 32, 64}));
  const auto s = ex.state();
  EXPECT_EQ(s.phase, Phase::kSampling);
  EXPECT_EQ(s.surviving, (std::vector<int>{16, 32, 64}));
  ASSERT_EQ(s.arms.size(), 3u);
  for (const auto& arm : s.arms) {
    EXPECT_GE(arm.history.size(), 2u);
    EXPECT_TRUE(arm.has_posterior);
  }
}

TEST(ExplorerTest, SamplingNeverIssuesPrunedBatchSize) {
  BatchSizeExplorer ex(Options({8, 16, 32, 64, 128}, 32));
  Rng rng(4);
  int t = 0;
  const std::map<int, std::pair<double, bool>> outcome = {
      {8, {2500, false}}, {16, {900, true}}, {32, {1000, true}}, {64, {1100, true}},
      {128, {3000, false}}};
  Walk(ex, outcome, 8, t, rng);
  ASSERT_EQ(ex.phase(), Phase::kSampling);
  for (int b : Walk(ex, outcome, 200, t, rng)) {
    EXPECT_TRUE(b == 16 || b == 32 || b == 64) << b;
  }
}

TEST(ExplorerTest, EarlyStopThreshold) {
  BatchSizeExplorer ex(Options({8, 16, 32}, 16));
  EXPECT_FALSE(ex.EarlyStopThreshold());
  Rng rng(1);
  ex.Issue(0, rng);
  ex.ReportResult(Sample(0, 16, 1000, true));
  EXPECT_EQ(*ex.EarlyStopThreshold(), 2000);
  ex.Issue(1, rng);
  ex.ReportResult(Sample(1, 8, 900, true));
  EXPECT_EQ(*ex.state().min_cost, 900);
  EXPECT_EQ(*ex.EarlyStopThreshold(), 1800);

  BatchSizeExplorer five(Options({8, 16, 32}, 16, 5.0));
  five.Issue(0, rng);
  five.ReportResult(Sample(0, 16, 1000, true));
  EXPECT_EQ(*five.EarlyStopThreshold(), 5000);
}

TEST(ExplorerTest, EarlyStoppedRunEndsDescentAndIsCensored) {
  BatchSizeExplorer ex(Options({8, 16, 32, 64}, 16));
  Rng rng(1);
  auto a = ex.Issue(0, rng);
  ex.ReportResult(Sample(0, a.batch_size, 1000, true));
  auto b = ex.Issue(1, rng);
  ASSERT_EQ(b.batch_size, 8);
  ASSERT_EQ(*b.threshold, 2000);
  ex.ReportResult(Sample(1, 8, 1950, false, true));
  EXPECT_EQ(ex.observations().at(8), (std::vector<double>{2000}));
  EXPECT_EQ(ex.state().pending_order, (std::vector<int>{32, 64}));
  EXPECT_EQ(ex.state().surviving, (std::vector<int>{16}));
}

TEST(ExplorerTest, NoConvergenceAtAllIsAnError) {
  BatchSizeExplorer ex(Options({8, 16}, 16));
  Rng rng(1);
  int t = 0;
  Walk(ex, {{8, {10, false}}, {16, {10, false}}}, 2, t, rng);
  EXPECT_THROW(ex.NextBatchSize(rng), StateError);
}

TEST(ExplorerTest, ReportValidation) {
  BatchSizeExplorer ex(Options({8, 16}, 16));
  Rng rng(1);
  EXPECT_THROW(ex.ReportResult(Sample(0, 16, 10, true)), StateError);
  ex.Issue(0, rng);
  EXPECT_THROW(ex.ReportResult(Sample(0, 8, 10, true)), StateError);
  EXPECT_THROW(ex.Issue(0, rng), StateError);
}

TEST(ExplorerTest, ConstructorValidates) {
  EXPECT_THROW(BatchSizeExplorer(Options({8, 16}, 32)), ValidationError);
  EXPECT_THROW(BatchSizeExplorer(Options({16, 8}, 8)), ValidationError);
  EXPECT_THROW(BatchSizeExplorer(Options({8, 16}, 8, 1.0)), ValidationError);
}

TEST(ConcurrentTest, FallsBackToDefaultBeforeAnyConvergence) {
  BatchSizeExplorer ex(Options({8, 16, 32, 64}, 32));
  Rng rng(1);
  const auto first = ex.Issue(0, rng);
  const auto second = ex.Issue(1, rng);
  EXPECT_EQ(first.batch_size, 32);
  EXPECT_EQ(second.batch_size, 32);
  EXPECT_EQ(second.phase, "pruning:r1:concurrent");
  EXPECT_EQ(ex.outstanding_count(), 2u);
}

TEST(ConcurrentTest, PicksBestKnownDuringPruning) {
  BatchSizeExplorer ex(Options({8, 16, 32, 64}, 32));
  Rng rng(1);
  ex.Issue(0, rng);
  ex.ReportResult(Sample(0, 32, 1000, true));
  ex.Issue(1, rng);  // walk: 16, still running
  ex.ReportResult(Sample(1, 16, 1200, true));
  ex.Issue(2, rng);  // walk: 8
  EXPECT_EQ(ex.ConcurrentBatchSize(rng), 32);
  const auto c = ex.Issue(3, rng);
  EXPECT_EQ(c.batch_size, 32);
  // Out-of-order completion is accepted.
  ex.ReportResult(Sample(3, 32, 990, true));
  ex.ReportResult(Sample(2, 8, 5000, false));
  EXPECT_FALSE(ex.HasOutstanding());
  EXPECT_EQ(*ex.state().min_cost, 990);
}

TEST(ConcurrentTest, SamplingDrawsMayDiffer) {
  BatchSizeExplorer ex(Options({16, 32}, 32));
  Rng rng(3);
  int t = 0;
  // Nearly equal, noisy arms give wide overlapping posteriors.
  const std::map<int, std::pair<double, bool>> outcome = {{16, {1000, true}}, {32, {1000, true}}};
  Walk(ex, outcome, 2, t, rng);
  for (int i = 0; i < 2; ++i) {
    const int b = ex.Issue(t, rng).batch_size;
    ex.ReportResult(Sample(t++, b, b == 16 ? 1300 : 700, true));
  }
  ASSERT_EQ(ex.phase(), Phase::kSampling);
  std::set<int> seen;
  for (int i = 0; i < 50; ++i) {
    const auto a = ex.Issue(t++, rng);
    const auto b = ex.Issue(t++, rng);
    seen.insert(a.batch_size);
    seen.insert(b.batch_size);
    EXPECT_EQ(a.phase, "sampling");
  }
  EXPECT_EQ(seen, (std::set<int>{16, 32}));
}

TEST(ExplorerTest, ZeroNoiseRoundTwoStartsAtTrueArgmin) {
  const std::vector<int> bs = {8, 16, 32, 64, 128};
  const std::map<int, std::pair<double, bool>> outcome = {
      {8, {1500, true}}, {16, {1100, true}}, {32, {1000, true}}, {64, {1050, true}},
      {128, {1400, true}}};
  for (int b0 : bs) {
    BatchSizeExplorer ex(Options(bs, b0, 5.0));
    Rng rng(1);
    int t = 0;
    Walk(ex, outcome, 5, t, rng);
    EXPECT_EQ(ex.state().current_default, 32) << "b0=" << b0;
  }
}

}  // namespace
}  // namespace recurtune
