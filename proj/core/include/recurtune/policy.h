#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "recurtune/domain.h"
#include "recurtune/explorer.h"
#include "recurtune/rng.h"

namespace recurtune {

enum class PolicyKind { kZeus, kGridSearch, kDefault };

const char* PolicyName(PolicyKind kind);  // "zeus", "grid", "default"
std::optional<PolicyKind> ParsePolicyKind(std::string_view name);

// What to run for one recurrence.
struct Decision {
  int batch_size = 0;
  // Fixed power limit; nullopt means profile just in time and use the
  // cost-optimal limit.
  std::optional<double> power_limit;
  std::optional<double> threshold;  // early-stop cost threshold
  std::string phase;
};

// A configuration-choosing policy driven by the simulator. Issue and Report
// calls are keyed by recurrence and may interleave.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual PolicyKind kind() const = 0;
  virtual Decision Issue(int recurrence, Rng& rng) = 0;
  virtual void Report(const CostSample& sample) = 0;
};

// Batch-size explorer plus just-in-time power profiling.
class ZeusPolicy : public Policy {
 public:
  explicit ZeusPolicy(const JobSpec& job);

  PolicyKind kind() const override { return PolicyKind::kZeus; }
  Decision Issue(int recurrence, Rng& rng) override;
  void Report(const CostSample& sample) override;

  const BatchSizeExplorer& explorer() const { return explorer_; }

 private:
  BatchSizeExplorer explorer_;
};

// Tries every (b, p) once in (b ascending, p ascending) order, skipping the
// remaining limits of a batch size that failed to converge, then repeats the
// cheapest converged run. Early stopping uses the same beta rule as Zeus.
class GridSearchPolicy : public Policy {
 public:
  explicit GridSearchPolicy(const JobSpec& job);

  PolicyKind kind() const override { return PolicyKind::kGridSearch; }
  Decision Issue(int recurrence, Rng& rng) override;
  void Report(const CostSample& sample) override;

  bool exploring() const;

 private:
  void SkipPruned();

  JobSpec job_;
  std::size_t next_ = 0;  // index into the flattened grid
  std::vector<int> pruned_;
  std::optional<double> min_cost_;
  std::optional<Config> best_;
};

// Always (b0, max power limit); no profiling, no early stopping.
class DefaultPolicy : public Policy {
 public:
  explicit DefaultPolicy(const JobSpec& job);

  PolicyKind kind() const override { return PolicyKind::kDefault; }
  Decision Issue(int recurrence, Rng& rng) override;
  void Report(const CostSample&) override {}

 private:
  Config config_;
};

std::unique_ptr<Policy> MakePolicy(PolicyKind kind, const JobSpec& job);

}  // namespace recurtune
