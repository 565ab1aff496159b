#include "recurtune/explorer.h"

#include <algorithm>
#include <string>

#include "recurtune/errors.h"

namespace recurtune {

const char* PhaseName(Phase phase) {
  return phase == Phase::kPruning ? "pruning" : "sampling";
}

ExplorerOptions ExplorerOptionsFor(const JobSpec& job) {
  ExplorerOptions options;
  options.batch_sizes = job.batch_sizes;
  options.default_batch_size = job.default_batch_size;
  options.beta = job.beta;
  if (job.window) options.window = static_cast<std::size_t>(*job.window);
  return options;
}

BatchSizeExplorer::BatchSizeExplorer(ExplorerOptions options)
    : options_(std::move(options)) {
  std::vector<std::string> problems;
  if (options_.batch_sizes.empty()) problems.emplace_back("no batch sizes");
  if (!std::is_sorted(options_.batch_sizes.begin(), options_.batch_sizes.end()) ||
      std::adjacent_find(options_.batch_sizes.begin(),
                         options_.batch_sizes.end()) !=
          options_.batch_sizes.end()) {
    problems.emplace_back("batch sizes not strictly increasing");
  }
  if (std::find(options_.batch_sizes.begin(), options_.batch_sizes.end(),
                options_.default_batch_size) == options_.batch_sizes.end()) {
    problems.emplace_back("default batch size not in set");
  }
  if (!(options_.beta > 1.0)) problems.emplace_back("beta must be greater than 1");
  if (options_.window && *options_.window < 2) {
    problems.emplace_back("window must hold at least 2 observations");
  }
  if (!problems.empty()) throw ValidationError(std::move(problems));
  StartRound(options_.batch_sizes, options_.default_batch_size);
}

void BatchSizeExplorer::StartRound(std::vector<int> candidates, int start) {
  candidates_ = std::move(candidates);
  start_index_ = static_cast<std::size_t>(
      std::find(candidates_.begin(), candidates_.end(), start) -
      candidates_.begin());
  current_default_ = start;
  stage_ = Stage::kStart;
  cursor_ = start_index_;
  round_converged_.clear();
}

int BatchSizeExplorer::WalkHead() const { return candidates_[cursor_]; }

void BatchSizeExplorer::AdvanceWalk(bool converged) {
  auto go_up = [this] {
    if (start_index_ + 1 < candidates_.size()) {
      stage_ = Stage::kUp;
      cursor_ = start_index_ + 1;
    } else {
      stage_ = Stage::kDone;
    }
  };
  switch (stage_) {
    case Stage::kStart:
      // The default's own outcome does not end either direction.
      if (start_index_ > 0) {
        stage_ = Stage::kDown;
        cursor_ = start_index_ - 1;
      } else {
        go_up();
      }
      break;
    case Stage::kDown:
      if (!converged || cursor_ == 0) {
        go_up();
      } else {
        --cursor_;
      }
      break;
    case Stage::kUp:
      if (!converged || cursor_ + 1 == candidates_.size()) {
        stage_ = Stage::kDone;
      } else {
        ++cursor_;
      }
      break;
    case Stage::kDone:
      break;
  }
}

void BatchSizeExplorer::EndRound() {
  std::vector<int> survivors(round_converged_.begin(), round_converged_.end());
  if (survivors.empty()) {
    exhausted_ = true;
    candidates_.clear();
    return;
  }
  if (round_ == 1) {
    int next_default = survivors.front();
    for (int b : survivors) {
      if (best_cost_.at(b) < best_cost_.at(next_default)) next_default = b;
    }
    round_ = 2;
    StartRound(std::move(survivors), next_default);
    return;
  }
  phase_ = Phase::kSampling;
  candidates_ = survivors;
  arms_.clear();
  for (int b : survivors) {
    arms_.push_back(SeedArm(
        MakeArm(b, options_.window, options_.prior_mean, options_.prior_variance),
        observations_.at(b)));
  }
}

int BatchSizeExplorer::NextBatchSize(Rng& rng) const {
  if (phase_ == Phase::kSampling) return Predict(arms_, rng);
  if (exhausted_) {
    throw StateError("pruning eliminated every batch size: none reached the target");
  }
  return WalkHead();
}

int BatchSizeExplorer::ConcurrentBatchSize(Rng& rng) const {
  if (phase_ == Phase::kSampling) return Predict(arms_, rng);
  std::optional<int> best;
  for (const auto& [b, cost] : best_cost_) {
    if (!std::binary_search(candidates_.begin(), candidates_.end(), b)) continue;
    if (!best || cost < best_cost_.at(*best)) best = b;
  }
  if (best) return *best;
  if (exhausted_) {
    throw StateError("pruning eliminated every batch size: none reached the target");
  }
  return current_default_;
}

std::optional<double> BatchSizeExplorer::EarlyStopThreshold() const {
  if (!min_cost_) return std::nullopt;
  return options_.beta * *min_cost_;
}

BatchSizeExplorer::Issuance BatchSizeExplorer::Issue(int recurrence, Rng& rng) {
  if (outstanding_.contains(recurrence)) {
    throw StateError("recurrence " + std::to_string(recurrence) +
                     " already issued");
  }
  Issuance out;
  out.recurrence = recurrence;
  out.threshold = EarlyStopThreshold();
  bool walk = false;
  if (phase_ == Phase::kSampling) {
    out.batch_size = Predict(arms_, rng);
    out.phase = "sampling";
  } else if (!walk_outstanding_ && !exhausted_) {
    out.batch_size = WalkHead();
    out.phase = "pruning:r" + std::to_string(round_);
    walk = true;
    walk_outstanding_ = true;
  } else {
    out.batch_size = ConcurrentBatchSize(rng);
    out.phase = "pruning:r" + std::to_string(round_) + ":concurrent";
  }
  outstanding_.emplace(recurrence, Pending{out.batch_size, out.threshold, walk});
  return out;
}

void BatchSizeExplorer::ReportResult(const CostSample& sample) {
  auto it = outstanding_.find(sample.recurrence);
  if (it == outstanding_.end()) {
    throw StateError("result for recurrence " +
                     std::to_string(sample.recurrence) +
                     " that is not outstanding");
  }
  const Pending pending = it->second;
  if (pending.batch_size != sample.config.batch_size) {
    throw StateError("result for batch size " +
                     std::to_string(sample.config.batch_size) +
                     " but recurrence " + std::to_string(sample.recurrence) +
                     " was issued " + std::to_string(pending.batch_size));
  }
  outstanding_.erase(it);

  const int b = sample.config.batch_size;
  if (sample.converged) {
    min_cost_ = min_cost_ ? std::min(*min_cost_, sample.cost) : sample.cost;
    auto [slot, inserted] = best_cost_.emplace(b, sample.cost);
    if (!inserted) slot->second = std::min(slot->second, sample.cost);
  }
  // Early-stopped runs are censored at the threshold they hit.
  const double observed = sample.early_stopped && pending.threshold
                              ? *pending.threshold
                              : sample.cost;
  observations_[b].push_back(observed);

  if (phase_ == Phase::kSampling) {
    auto arm = std::find_if(arms_.begin(), arms_.end(),
                            [b](const ArmState& a) { return a.batch_size == b; });
    if (arm != arms_.end()) *arm = Observe(std::move(*arm), observed);
    return;
  }
  if (!pending.walk) return;
  walk_outstanding_ = false;
  if (sample.converged) round_converged_.insert(b);
  AdvanceWalk(sample.converged);
  if (stage_ == Stage::kDone) EndRound();
}

std::vector<int> BatchSizeExplorer::ProjectedWalk() const {
  std::vector<int> order;
  if (phase_ != Phase::kPruning || exhausted_) return order;
  auto push_down = [&](std::size_t from) {
    for (std::size_t i = from + 1; i-- > 0;) order.push_back(candidates_[i]);
  };
  auto push_up = [&](std::size_t from) {
    for (std::size_t i = from; i < candidates_.size(); ++i) {
      order.push_back(candidates_[i]);
    }
  };
  switch (stage_) {
    case Stage::kStart:
      order.push_back(candidates_[start_index_]);
      if (start_index_ > 0) push_down(start_index_ - 1);
      push_up(start_index_ + 1);
      break;
    case Stage::kDown:
      push_down(cursor_);
      push_up(start_index_ + 1);
      break;
    case Stage::kUp:
      push_up(cursor_);
      break;
    case Stage::kDone:
      break;
  }
  return order;
}

ExplorerState BatchSizeExplorer::state() const {
  ExplorerState s;
  s.phase = phase_;
  s.round = round_;
  s.current_default = current_default_;
  s.pending_order = ProjectedWalk();
  if (phase_ == Phase::kSampling) {
    s.surviving = candidates_;
  } else {
    s.surviving.assign(round_converged_.begin(), round_converged_.end());
  }
  s.min_cost = min_cost_;
  s.arms = arms_;
  return s;
}

}  // namespace recurtune
