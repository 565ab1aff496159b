#include "recurtune/policy.h"

#include <algorithm>

#include "recurtune/errors.h"

namespace recurtune {

const char* PolicyName(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::kZeus:
      return "zeus";
    case PolicyKind::kGridSearch:
      return "grid";
    case PolicyKind::kDefault:
      return "default";
  }
  return "unknown";
}

std::optional<PolicyKind> ParsePolicyKind(std::string_view name) {
  if (name == "zeus") return PolicyKind::kZeus;
  if (name == "grid") return PolicyKind::kGridSearch;
  if (name == "default") return PolicyKind::kDefault;
  return std::nullopt;
}

ZeusPolicy::ZeusPolicy(const JobSpec& job) : explorer_(ExplorerOptionsFor(job)) {}

Decision ZeusPolicy::Issue(int recurrence, Rng& rng) {
  auto issued = explorer_.Issue(recurrence, rng);
  return {issued.batch_size, std::nullopt, issued.threshold, std::move(issued.phase)};
}

void ZeusPolicy::Report(const CostSample& sample) { explorer_.ReportResult(sample); }

GridSearchPolicy::GridSearchPolicy(const JobSpec& job) : job_(job) {}

bool GridSearchPolicy::exploring() const {
  return next_ < job_.batch_sizes.size() * job_.power_limits.size();
}

void GridSearchPolicy::SkipPruned() {
  const std::size_t np = job_.power_limits.size();
  while (exploring()) {
    const int b = job_.batch_sizes[next_ / np];
    if (std::find(pruned_.begin(), pruned_.end(), b) == pruned_.end()) break;
    next_ = (next_ / np + 1) * np;
  }
}

Decision GridSearchPolicy::Issue(int, Rng&) {
  Decision d;
  if (min_cost_) d.threshold = job_.beta * *min_cost_;
  SkipPruned();
  if (exploring()) {
    const std::size_t np = job_.power_limits.size();
    d.batch_size = job_.batch_sizes[next_ / np];
    d.power_limit = job_.power_limits[next_ % np];
    d.phase = "grid:explore";
    ++next_;
    return d;
  }
  const Config c = best_.value_or(Config{job_.default_batch_size, job_.power_limits.back()});
  d.batch_size = c.batch_size;
  d.power_limit = c.power_limit;
  d.phase = "grid:exploit";
  return d;
}

void GridSearchPolicy::Report(const CostSample& sample) {
  if (!sample.converged) {
    if (std::find(pruned_.begin(), pruned_.end(), sample.config.batch_size) == pruned_.end()) {
      pruned_.push_back(sample.config.batch_size);
    }
    SkipPruned();
    return;
  }
  if (!min_cost_ || sample.cost < *min_cost_) {
    min_cost_ = sample.cost;
    best_ = sample.config;
  }
}

DefaultPolicy::DefaultPolicy(const JobSpec& job)
    : config_{job.default_batch_size, job.power_limits.back()} {}

Decision DefaultPolicy::Issue(int, Rng&) {
  return {config_.batch_size, config_.power_limit, std::nullopt, "default"};
}

std::unique_ptr<Policy> MakePolicy(PolicyKind kind, const JobSpec& job) {
  ValidateOrThrow(job);
  switch (kind) {
    case PolicyKind::kZeus:
      return std::make_unique<ZeusPolicy>(job);
    case PolicyKind::kGridSearch:
      return std::make_unique<GridSearchPolicy>(job);
    case PolicyKind::kDefault:
      return std::make_unique<DefaultPolicy>(job);
  }
  throw StateError("unknown policy");
}

}  // namespace recurtune
