#include "recurtune/sim.h"

#include <gtest/gtest.h>

#include <set>

#include "recurtune/errors.h"
#include "recurtune/generator.h"
#include "support/oracles.h"

namespace recurtune {
namespace {

// One batch size, two limits. At eta = 1 a steady epoch at 100 W costs 300 J
// and the profiling epoch costs (300 + 600) / 2 = 450 J.
TraceBundle TinyBundle(int epochs) {
  BundleMetadata meta;
  meta.job_id = "tiny";
  meta.default_batch_size = 32;
  meta.max_power = 200;
  meta.max_epochs = 100;
  std::vector<PowerProfile> power = {{32, 100, 100, 1.0 / 3.0, 0}, {32, 200, 200, 1.0 / 3.0, 0}};
  std::vector<TrainingRecord> training = {{32, 0, epochs, 0}};
  return TraceBundle::Create(meta, power, training);
}

TEST(RunRecurrenceTest, PredictiveEarlyStop) {
  const auto bundle = TinyBundle(20);
  const auto job = JobFromBundle(bundle, 1.0, 2.0, 1, std::nullopt, 1);
  ProfileCache cache;
  Rng rng(1);
  const auto s = RunRecurrence(job, 0, 32, std::nullopt, bundle, cache, 2000.0, 0, rng);
  // 450 + 5 * 300 = 1950; a seventh epoch would reach 2250.
  EXPECT_EQ(s.epochs_run, 6);
  EXPECT_TRUE(s.early_stopped);
  EXPECT_FALSE(s.converged);
  EXPECT_TRUE(s.profiled);
  EXPECT_EQ(s.config.power_limit, 100.0);
  EXPECT_NEAR(s.cost, 1950.0, 1e-9);
  EXPECT_NEAR(s.time, 18.0, 1e-9);
}

TEST(RunRecurrenceTest, ProfilesOncePerBatchSize) {
  const auto bundle = TinyBundle(4);
  const auto job = JobFromBundle(bundle, 1.0, 2.0, 2, std::nullopt, 1);
  ProfileCache cache;
  Rng rng(1);
  const auto a = RunRecurrence(job, 0, 32, std::nullopt, bundle, cache, std::nullopt, 0, rng);
  const auto b = RunRecurrence(job, 1, 32, std::nullopt, bundle, cache, std::nullopt, 0, rng);
  EXPECT_TRUE(a.profiled);
  EXPECT_FALSE(b.profiled);
  EXPECT_TRUE(a.converged && b.converged);
  EXPECT_NEAR(a.cost, 450 + 3 * 300, 1e-9);
  EXPECT_NEAR(b.cost, 4 * 300, 1e-9);
}

TEST(RunRecurrenceTest, AtLeastOneEpochRuns) {
  const auto bundle = TinyBundle(4);
  const auto job = JobFromBundle(bundle, 1.0, 2.0, 1, std::nullopt, 1);
  ProfileCache cache;
  Rng rng(1);
  const auto s = RunRecurrence(job, 0, 32, 200.0, bundle, cache, 1.0, 0, rng);
  EXPECT_EQ(s.epochs_run, 1);
  EXPECT_TRUE(s.early_stopped);
  EXPECT_FALSE(s.profiled);
}

TEST(RunRecurrenceTest, FailedReplicaRunsToMaxEpochs) {
  auto bundle = TinyBundle(4);
  BundleMetadata meta = bundle.metadata();
  meta.max_epochs = 7;
  std::vector<TrainingRecord> training = {{32, 0, std::nullopt, 0}};
  bundle = TraceBundle::Create(meta, {bundle.power().begin(), bundle.power().end()}, training);
  const auto job = JobFromBundle(bundle, 1.0, 2.0, 1, std::nullopt, 1);
  ProfileCache cache;
  Rng rng(1);
  const auto s = RunRecurrence(job, 0, 32, 100.0, bundle, cache, std::nullopt, 0, rng);
  EXPECT_EQ(s.epochs_run, 7);
  EXPECT_FALSE(s.converged);
  EXPECT_FALSE(s.early_stopped);
}

class ExperimentTest : public ::testing::Test {
 protected:
  void SetUp() override {
    bundle_ = GenerateSynthetic(Preset("balanced-6x5"), 7);
    job_ = JobFromBundle(bundle_, 0.5, 2.0, 60, std::nullopt, 3);
  }
  TraceBundle bundle_;
  JobSpec job_;
};

TEST_F(ExperimentTest, DefaultPolicyNeverMoves) {
  const auto r = RunExperiment(job_, bundle_, PolicyKind::kDefault);
  for (const auto& rec : r.records) {
    EXPECT_EQ(rec.sample.config, (Config{128, 250}));
    EXPECT_FALSE(rec.sample.profiled);
    EXPECT_FALSE(rec.sample.early_stopped);
  }
  EXPECT_TRUE(AuditResult(r, bundle_).empty());
}

TEST_F(ExperimentTest, GridExploresAtMostTheWholeGrid) {
  const auto r = RunExperiment(job_, bundle_, PolicyKind::kGridSearch);
  int explore = 0;
  std::set<std::pair<int, double>> distinct;
  for (const auto& rec : r.records) {
    if (rec.phase == "grid:explore") {
      ++explore;
      distinct.emplace(rec.sample.config.batch_size, rec.sample.config.power_limit);
    }
  }
  EXPECT_LE(explore, 30);
  EXPECT_EQ(distinct.size(), static_cast<std::size_t>(explore));
  EXPECT_EQ(r.records.back().phase, "grid:exploit");
  EXPECT_TRUE(AuditResult(r, bundle_).empty());
}

TEST_F(ExperimentTest, OptimumMatchesNestedLoopOracle) {
  const auto r = RunExperiment(job_, bundle_, PolicyKind::kZeus);
  const std::vector<TrainingRecord> records(bundle_.training().begin(), bundle_.training().end());
  const std::vector<PowerProfile> power(bundle_.power().begin(), bundle_.power().end());
  const auto oracle =
      testing::NestedLoopOptimum(job_.batch_sizes, job_.power_limits,
                                 testing::NaiveMeanEpochs(records, 0), power, 0.5, 250);
  ASSERT_TRUE(oracle);
  EXPECT_EQ(r.optimum.at(0).config, (Config{oracle->batch_size, oracle->power_limit}));
  EXPECT_TRUE(testing::RelClose(r.optimum.at(0).cost, oracle->cost, 1e-12));
}

TEST_F(ExperimentTest, ZeroNoiseZeusSettlesAtZeroRegret) {
  auto g = Preset("balanced-6x5");
  g.noise = 0.0;
  const auto bundle = GenerateSynthetic(g, 1);
  const auto job = JobFromBundle(bundle, 0.5, 2.0, 60, std::nullopt, 3);
  const auto r = RunExperiment(job, bundle, PolicyKind::kZeus);
  for (std::size_t i = 50; i < r.records.size(); ++i) {
    EXPECT_NEAR(r.records[i].regret, 0.0, 1e-9 * r.optimum.at(0).cost) << "recurrence " << i;
  }
  EXPECT_TRUE(AuditResult(r, bundle).empty());
}

TEST_F(ExperimentTest, DeterministicPerSeed) {
  EXPECT_EQ(RunExperiment(job_, bundle_, PolicyKind::kZeus),
            RunExperiment(job_, bundle_, PolicyKind::kZeus));
  auto other = job_;
  other.rng_seed = 4;
  EXPECT_NE(RunExperiment(job_, bundle_, PolicyKind::kZeus).records,
            RunExperiment(other, bundle_, PolicyKind::kZeus).records);
}

TEST_F(ExperimentTest, UnboundedWindowDriftRunMatchesPlainRun) {
  const auto plain = RunExperiment(job_, bundle_, PolicyKind::kZeus);
  const auto drift = RunDriftExperiment(job_, bundle_, std::nullopt, SliceMap{});
  EXPECT_EQ(plain, drift);
}

TEST_F(ExperimentTest, RegretAndCumulativeSeries) {
  const auto r = RunExperiment(job_, bundle_, PolicyKind::kZeus);
  double sum = 0.0;
  for (std::size_t i = 0; i < r.records.size(); ++i) {
    const auto& rec = r.records[i];
    EXPECT_GE(rec.regret, 0.0);
    if (!rec.sample.converged) EXPECT_DOUBLE_EQ(rec.regret, rec.sample.cost);
    sum += rec.regret;
    EXPECT_EQ(r.cumulative_regret[i], sum);
  }
  EXPECT_EQ(r.TotalRegret(), sum);
}

TEST_F(ExperimentTest, BackToBackScheduleMatchesSequentialRun) {
  const auto plain = RunExperiment(job_, bundle_, PolicyKind::kZeus);
  const auto schedule = ArrivalSchedule::BackToBack(plain);
  EXPECT_FALSE(HasOverlap(schedule, plain));
  const auto scheduled = RunExperiment(
      job_, bundle_, ExperimentOptions{PolicyKind::kZeus, schedule, {}});
  EXPECT_EQ(plain, scheduled);
  EXPECT_THROW(RunConcurrentExperiment(job_, bundle_, schedule), ValidationError);
}

TEST_F(ExperimentTest, OverlappingScheduleCompletes) {
  const auto r = RunConcurrentExperiment(job_, bundle_, ArrivalSchedule::Uniform(60, 1000.0));
  ASSERT_EQ(r.records.size(), 60u);
  EXPECT_TRUE(AuditResult(r, bundle_).empty());
  bool concurrent = false;
  for (const auto& rec : r.records) {
    concurrent = concurrent || rec.phase.find("concurrent") != std::string::npos;
  }
  EXPECT_TRUE(concurrent);
}

TEST_F(ExperimentTest, ScheduleValidation) {
  auto s = ArrivalSchedule::Uniform(60, 1.0);
  EXPECT_TRUE(ValidateSchedule(s, 60).empty());
  EXPECT_FALSE(ValidateSchedule(s, 59).empty());
  std::swap(s.submissions[3].second, s.submissions[4].second);
  EXPECT_FALSE(ValidateSchedule(s, 60).empty());
  EXPECT_THROW(RunExperiment(job_, bundle_, ExperimentOptions{PolicyKind::kZeus, s, {}}),
               ValidationError);
}

TEST(SliceMapTest, EvenSplit) {
  const auto m = SliceMap::Even(2, 101);
  EXPECT_EQ(m.starts, (std::vector<std::pair<int, int>>{{0, 0}, {50, 1}}));
  EXPECT_EQ(m.SliceAt(49), 0);
  EXPECT_EQ(m.SliceAt(50), 1);
  EXPECT_EQ(SliceMap{}.SliceAt(7), 0);
  const auto crowded = SliceMap::Even(5, 3);
  EXPECT_EQ(crowded.SliceAt(0), 1);
  EXPECT_EQ(crowded.SliceAt(2), 4);
}

TEST_F(ExperimentTest, MissingSliceIsRejected) {
  const SliceMap two{{{0, 0}, {10, 1}}};
  EXPECT_THROW(RunExperiment(job_, bundle_, ExperimentOptions{PolicyKind::kZeus, {}, two}),
               ValidationError);
}

TEST_F(ExperimentTest, AuditCatchesTampering) {
  auto r = RunExperiment(job_, bundle_, PolicyKind::kZeus);
  r.records[5].sample.cost += 1.0;
  r.cumulative_regret[7] += 1.0;
  EXPECT_EQ(AuditResult(r, bundle_).size(), 2u);
}

}  // namespace
}  // namespace recurtune
