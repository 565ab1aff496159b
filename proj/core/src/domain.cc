#include "recurtune/domain.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "recurtune/cost.h"
#include "recurtune/errors.h"

namespace recurtune {

ValidationError::ValidationError(std::vector<std::string> problems)
    : Error([&] {
        std::string msg = "validation failed";
        for (const auto& p : problems) msg += "\n  - " + p;
        return msg;
      }()),
      problems_(std::move(problems)) {}

ParseError::ParseError(std::string file, std::size_t line,
                       const std::string& what)
    : Error(file + ":" + std::to_string(line) + ": " + what),
      file_(std::move(file)),
      line_(line) {}

std::vector<std::string> Validate(const JobSpec& job) {
  std::vector<std::string> errors;
  if (job.batch_sizes.empty()) errors.emplace_back("batch size set is empty");
  if (job.power_limits.empty()) errors.emplace_back("power limit set is empty");
  for (int b : job.batch_sizes) {
    if (b <= 0) {
      errors.emplace_back("batch sizes must be positive");
      break;
    }
  }
  if (std::adjacent_find(job.batch_sizes.begin(), job.batch_sizes.end(),
                         std::greater_equal<>()) != job.batch_sizes.end()) {
    errors.emplace_back("batch sizes not strictly increasing");
  }
  for (double p : job.power_limits) {
    if (!(p > 0.0) || !std::isfinite(p)) {
      errors.emplace_back("power limits must be positive and finite");
      break;
    }
  }
  if (std::adjacent_find(job.power_limits.begin(), job.power_limits.end(),
                         std::greater_equal<>()) != job.power_limits.end()) {
    errors.emplace_back("power limits not strictly increasing");
  }
  if (std::find(job.batch_sizes.begin(), job.batch_sizes.end(),
                job.default_batch_size) == job.batch_sizes.end()) {
    errors.emplace_back("default batch size not in set");
  }
  if (!(job.max_power > 0.0) || !std::isfinite(job.max_power)) {
    errors.emplace_back("max power must be positive and finite");
  } else if (!job.power_limits.empty() &&
             job.max_power < *std::max_element(job.power_limits.begin(),
                                               job.power_limits.end())) {
    errors.emplace_back("max power below the largest power limit");
  }
  if (!(job.eta >= 0.0 && job.eta <= 1.0)) {
    errors.emplace_back("eta out of [0,1]");
  }
  if (!(job.beta > 1.0) || !std::isfinite(job.beta)) {
    errors.emplace_back("beta must be greater than 1");
  }
  if (job.recurrences <= 0) errors.emplace_back("recurrences must be positive");
  // A one-slot window never holds enough observations to estimate variance.
  if (job.window && *job.window < 2) {
    errors.emplace_back("window must hold at least 2 observations");
  }
  if (job.max_epochs <= 0) errors.emplace_back("max epochs must be positive");
  return errors;
}

void ValidateOrThrow(const JobSpec& job) {
  auto errors = Validate(job);
  if (!errors.empty()) throw ValidationError(std::move(errors));
}

CostSample MakeCostSample(int recurrence, Config config, double energy,
                          double time, double eta, double max_power,
                          int epochs_run, bool converged, bool early_stopped,
                          bool profiled) {
  CostSample s;
  s.recurrence = recurrence;
  s.config = config;
  s.energy = energy;
  s.time = time;
  s.cost = BlendedCost(energy, time, eta, max_power);
  s.epochs_run = epochs_run;
  s.converged = converged;
  s.early_stopped = early_stopped;
  s.profiled = profiled;
  return s;
}

}  // namespace recurtune
