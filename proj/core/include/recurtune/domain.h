#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace recurtune {

// Watts, joules and seconds are plain doubles throughout; blended cost is in
// joule-equivalents (energy plus MAXPOWER-scaled time).

// A recurring training job and the knobs the optimizer may turn.
struct JobSpec {
  std::string job_id;
  std::vector<int> batch_sizes;      // strictly increasing
  std::vector<double> power_limits;  // watts, strictly increasing
  int default_batch_size = 0;        // must be in batch_sizes
  double max_power = 0.0;            // watts; >= every power limit
  double eta = 0.5;                  // energy weight in [0, 1]
  double beta = 2.0;                 // early-stop multiplier, > 1
  int recurrences = 1;
  std::optional<int> window;         // nullopt: unbounded cost history
  int max_epochs = 1;
  std::uint64_t rng_seed = 0;

  bool operator==(const JobSpec&) const = default;
};

// Returns one message per violated invariant; empty means valid.
std::vector<std::string> Validate(const JobSpec& job);

// Throws ValidationError listing every problem.
void ValidateOrThrow(const JobSpec& job);

struct Config {
  int batch_size = 0;
  double power_limit = 0.0;

  bool operator==(const Config&) const = default;
};

// Measured average power and throughput for one (batch size, power limit).
struct PowerProfile {
  int batch_size = 0;
  double power_limit = 0.0;
  double avg_power = 0.0;   // watts
  double throughput = 0.0;  // epochs per second
  int slice = 0;

  bool operator==(const PowerProfile&) const = default;
};

// Epochs-to-target of one seed replica; nullopt when the run never reached
// the target.
struct TrainingRecord {
  int batch_size = 0;
  int seed_index = 0;
  std::optional<int> epochs_to_target;
  int slice_index = 0;

  bool converged() const { return epochs_to_target.has_value(); }
  bool operator==(const TrainingRecord&) const = default;
};

// Outcome of one recurrence.
struct CostSample {
  int recurrence = 0;
  Config config;
  double energy = 0.0;  // joules
  double time = 0.0;    // seconds
  double cost = 0.0;    // eta*energy + (1-eta)*max_power*time
  int epochs_run = 0;
  bool converged = false;
  bool early_stopped = false;
  bool profiled = false;

  bool operator==(const CostSample&) const = default;
};

// Builds a sample whose cost field is derived from energy and time, so the
// accounting identity holds by construction.
CostSample MakeCostSample(int recurrence, Config config, double energy,
                          double time, double eta, double max_power,
                          int epochs_run, bool converged, bool early_stopped,
                          bool profiled);

}  // namespace recurtune
