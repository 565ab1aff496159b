#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "recurtune/cost.h"
#include "recurtune/domain.h"
#include "recurtune/policy.h"
#include "recurtune/power.h"
#include "recurtune/rng.h"
#include "recurtune/traceio.h"

namespace recurtune {

// JobSpec over the bundle's grid and metadata.
JobSpec JobFromBundle(const TraceBundle& bundle, double eta, double beta,
                      int recurrences, std::optional<int> window,
                      std::uint64_t seed);

// Replays one recurrence at batch size b.
//
// With no fixed power limit, an unprofiled b is profiled during its first
// epoch (charged at the profiling-epoch cost) and the cost-optimal limit from
// `cache` is used. A seed replica is drawn uniformly from (b, slice). Epochs
// accumulate until the target is reached, max_epochs runs out, or the next
// epoch would push the blended cost above `threshold`. At least one epoch
// always runs.
CostSample RunRecurrence(const JobSpec& job, int recurrence, int batch_size,
                         std::optional<double> fixed_power_limit,
                         const TraceBundle& traces, ProfileCache& cache,
                         std::optional<double> threshold, int slice, Rng& rng);

struct ExperimentResult;

// Submission times, one per recurrence 0..T-1.
struct ArrivalSchedule {
  std::vector<std::pair<int, double>> submissions;  // (recurrence, seconds)

  // Submissions `spacing` seconds apart.
  static ArrivalSchedule Uniform(int recurrences, double spacing);

  // Each submission at the previous one's completion in `result`, so nothing
  // overlaps.
  static ArrivalSchedule BackToBack(const ExperimentResult& result);
};

std::vector<std::string> ValidateSchedule(const ArrivalSchedule& schedule,
                                          int recurrences);

// Maps recurrences to trace slices. Each entry (start, slice) applies from
// recurrence `start` until the next entry; empty means slice 0 throughout.
struct SliceMap {
  std::vector<std::pair<int, int>> starts;

  int SliceAt(int recurrence) const;

  // Spreads `slices` slices evenly over `recurrences` recurrences.
  static SliceMap Even(int slices, int recurrences);
};

struct RecurrenceRecord {
  int recurrence = 0;
  int slice = 0;
  std::string phase;
  CostSample sample;
  std::optional<double> threshold;
  double regret = 0.0;

  bool operator==(const RecurrenceRecord&) const = default;
};

struct ExperimentResult {
  std::string policy;
  std::uint64_t seed = 0;
  JobSpec job;
  std::vector<RecurrenceRecord> records;  // by recurrence
  std::vector<double> cumulative_regret;
  std::map<int, Optimum> optimum;  // per slice
  // Recurrences in the order their results reached the policy.
  std::vector<int> report_order;

  double TotalCost() const;
  double TotalRegret() const;
  // Mean cost of recurrences [first, records.size()).
  double MeanCostFrom(std::size_t first) const;

  bool operator==(const ExperimentResult&) const = default;
};

// Expected-cost oracle of one slice over the job's grid.
Optimum SliceOptimum(const TraceBundle& traces, int slice, const JobSpec& job);

// Regret is measured against the expected cost of the configuration that
// ran: for a converged run, the mean converged epochs at (b, slice) times the
// epoch cost at the chosen limit, plus the profiling surcharge if it was
// profiled, minus the slice optimum. A run that failed to converge is pure
// waste and its whole cost is regret.
double PseudoRegret(const CostSample& sample, const TraceBundle& traces,
                    int slice, const JobSpec& job, const Optimum& optimum);

struct ExperimentOptions {
  PolicyKind policy = PolicyKind::kZeus;
  std::optional<ArrivalSchedule> schedule;  // nullopt: sequential
  SliceMap slices;
};

ExperimentResult RunExperiment(const JobSpec& job, const TraceBundle& traces,
                               const ExperimentOptions& options);

inline ExperimentResult RunExperiment(const JobSpec& job, const TraceBundle& traces,
                                      PolicyKind policy) {
  return RunExperiment(job, traces, ExperimentOptions{policy, std::nullopt, {}});
}

// Zeus with the given window across drifting slices.
ExperimentResult RunDriftExperiment(JobSpec job, const TraceBundle& traces,
                                    std::optional<int> window,
                                    const SliceMap& slices);

// Zeus under a schedule that must contain at least one overlap.
ExperimentResult RunConcurrentExperiment(const JobSpec& job, const TraceBundle& traces,
                                         const ArrivalSchedule& schedule);

// True if some submission starts before an earlier one completes, given the
// completion times in `result`.
bool HasOverlap(const ArrivalSchedule& schedule, const ExperimentResult& result);

// Post-hoc invariant checks; returns one message per violation.
//   - cost equals the blended cost of energy and time exactly
//   - cumulative regret is the prefix sum of the regret column
//   - early-stopped or thresholded runs stay within threshold + one epoch
//   - each batch size is profiled at most once
//   - every recurrence is reported exactly once
std::vector<std::string> AuditResult(const ExperimentResult& result,
                                     const TraceBundle& traces);

std::vector<std::string> AuditEarlyStop(const ExperimentResult& result,
                                        const TraceBundle& traces);

}  // namespace recurtune
