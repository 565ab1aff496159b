#include "recurtune/domain.h"

#include <gtest/gtest.h>

#include <algorithm>

#include "recurtune/cost.h"
#include "recurtune/errors.h"

namespace recurtune {
namespace {

JobSpec WellFormed() {
  JobSpec job;
  job.job_id = "js";
  job.batch_sizes = {8, 16, 32, 64};
  job.power_limits = {100, 125, 150, 175, 200, 225, 250};
  job.default_batch_size = 32;
  job.max_power = 250;
  job.eta = 0.5;
  job.beta = 2.0;
  job.recurrences = 10;
  job.max_epochs = 100;
  return job;
}

bool Has(const std::vector<std::string>& problems, const std::string& msg) {
  return std::find(problems.begin(), problems.end(), msg) != problems.end();
}

TEST(ValidateTest, WellFormedJobIsOk) { EXPECT_TRUE(Validate(WellFormed()).empty()); }

TEST(ValidateTest, DefaultBatchSizeMustBeInSet) {
  auto job = WellFormed();
  job.batch_sizes = {8, 16, 64};
  job.default_batch_size = 32;
  EXPECT_TRUE(Has(Validate(job), "default batch size not in set"));
}

TEST(ValidateTest, EtaOutOfRange) {
  auto job = WellFormed();
  job.eta = 1.5;
  EXPECT_TRUE(Has(Validate(job), "eta out of [0,1]"));
  job.eta = -0.1;
  EXPECT_TRUE(Has(Validate(job), "eta out of [0,1]"));
  job.eta = 0.0;
  EXPECT_TRUE(Validate(job).empty());
  job.eta = 1.0;
  EXPECT_TRUE(Validate(job).empty());
}

TEST(ValidateTest, ReportsEveryProblem) {
  auto job = WellFormed();
  job.eta = 2;
  job.beta = 1.0;
  job.batch_sizes = {16, 8, 32};
  job.power_limits = {100, 100};
  job.max_power = 50;
  const auto problems = Validate(job);
  EXPECT_TRUE(Has(problems, "eta out of [0,1]"));
  EXPECT_TRUE(Has(problems, "beta must be greater than 1"));
  EXPECT_TRUE(Has(problems, "batch sizes not strictly increasing"));
  EXPECT_TRUE(Has(problems, "power limits not strictly increasing"));
  EXPECT_TRUE(Has(problems, "max power below the largest power limit"));
}

TEST(ValidateTest, PositiveCounts) {
  auto job = WellFormed();
  job.recurrences = 0;
  job.max_epochs = 0;
  EXPECT_EQ(Validate(job).size(), 2u);
}

TEST(ValidateTest, WindowNeedsTwoSlots) {
  auto job = WellFormed();
  job.window = 1;
  EXPECT_FALSE(Validate(job).empty());
  job.window = 2;
  EXPECT_TRUE(Validate(job).empty());
}

TEST(ValidateTest, ThrowingFormCarriesProblems) {
  auto job = WellFormed();
  job.eta = 3;
  try {
    ValidateOrThrow(job);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_TRUE(Has(e.problems(), "eta out of [0,1]"));
  }
  EXPECT_NO_THROW(ValidateOrThrow(WellFormed()));
}

TEST(CostSampleTest, CostIdentityHoldsByConstruction) {
  const auto s = MakeCostSample(3, {32, 150}, 1234.5, 17.25, 0.3, 250, 5, true, false, true);
  EXPECT_EQ(s.cost, BlendedCost(1234.5, 17.25, 0.3, 250));
  EXPECT_EQ(s.recurrence, 3);
  EXPECT_EQ(s.config, (Config{32, 150}));
  EXPECT_TRUE(s.profiled);
}

TEST(TrainingRecordTest, ConvergedIffEpochsPresent) {
  TrainingRecord r{32, 0, 37, 0};
  EXPECT_TRUE(r.converged());
  r.epochs_to_target.reset();
  EXPECT_FALSE(r.converged());
}

}  // namespace
}  // namespace recurtune
