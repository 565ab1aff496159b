#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "recurtune/bandit.h"
#include "recurtune/domain.h"
#include "recurtune/rng.h"

namespace recurtune {

enum class Phase { kPruning, kSampling };

const char* PhaseName(Phase phase);

// Snapshot of the batch-size optimizer.
struct ExplorerState {
  Phase phase = Phase::kPruning;
  int round = 1;
  int current_default = 0;
  // Remaining walk of this round, assuming every remaining run converges.
  std::vector<int> pending_order;
  std::vector<int> surviving;
  std::optional<double> min_cost;
  std::vector<ArmState> arms;
};

struct ExplorerOptions {
  std::vector<int> batch_sizes;  // strictly increasing
  int default_batch_size = 0;
  double beta = 2.0;
  std::optional<std::size_t> window;
  double prior_mean = 0.0;
  double prior_variance = kFlatPrior;
};

ExplorerOptions ExplorerOptionsFor(const JobSpec& job);

// Batch-size optimizer: two rounds of pruning exploration around the default
// batch size, then Gaussian Thompson Sampling over the survivors.
//
// Each round visits the round's default first, then smaller batch sizes in
// descending order until one fails to converge, then larger ones in
// ascending order until one fails. Only batch sizes that converged in the
// round carry over; the next default is the survivor with the smallest
// observed cost. After round two every survivor has at least two
// observations and seeds a bandit arm.
//
// Issuances are tracked by recurrence index so results may be reported in
// any order. A run is a convergence failure if it was early-stopped or ran
// out of epochs.
class BatchSizeExplorer {
 public:
  explicit BatchSizeExplorer(ExplorerOptions options);

  struct Issuance {
    int recurrence = 0;
    int batch_size = 0;
    std::optional<double> threshold;
    std::string phase;
  };

  // Chooses and registers the batch size for a new submission: the walk head
  // when it is not already running, otherwise the concurrent choice.
  Issuance Issue(int recurrence, Rng& rng);

  // Walk head in pruning, a Thompson draw in sampling. Throws StateError if
  // pruning eliminated every batch size.
  int NextBatchSize(Rng& rng) const;

  // Choice for a submission made while an earlier one is still running:
  // the best-known converged batch size in pruning (current default before
  // any convergence), an ordinary Thompson draw in sampling.
  int ConcurrentBatchSize(Rng& rng) const;

  // beta * min observed converged cost, or nullopt before any convergence.
  std::optional<double> EarlyStopThreshold() const;

  void ReportResult(const CostSample& sample);

  Phase phase() const { return phase_; }
  bool HasOutstanding() const { return !outstanding_.empty(); }
  std::size_t outstanding_count() const { return outstanding_.size(); }
  ExplorerState state() const;

  // Every observation fed to the optimizer per batch size, censored values
  // included, in report order.
  const std::map<int, std::vector<double>>& observations() const {
    return observations_;
  }

 private:
  enum class Stage { kStart, kDown, kUp, kDone };

  struct Pending {
    int batch_size;
    std::optional<double> threshold;
    bool walk;
  };

  void StartRound(std::vector<int> candidates, int start);
  int WalkHead() const;
  void AdvanceWalk(bool converged);
  void EndRound();
  std::vector<int> ProjectedWalk() const;

  ExplorerOptions options_;
  Phase phase_ = Phase::kPruning;
  int round_ = 1;

  std::vector<int> candidates_;  // this round, ascending
  std::size_t start_index_ = 0;
  int current_default_ = 0;
  Stage stage_ = Stage::kStart;
  std::size_t cursor_ = 0;
  bool walk_outstanding_ = false;
  std::set<int> round_converged_;
  bool exhausted_ = false;

  std::optional<double> min_cost_;
  std::map<int, double> best_cost_;  // min converged cost per batch size
  std::map<int, std::vector<double>> observations_;
  std::map<int, Pending> outstanding_;
  std::vector<ArmState> arms_;
};

}  // namespace recurtune
