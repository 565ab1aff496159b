#pragma once

#include <map>
#include <span>
#include <vector>

#include "recurtune/domain.h"

namespace recurtune {

struct PowerChoice {
  double power_limit = 0.0;
  double epoch_cost = 0.0;

  bool operator==(const PowerChoice&) const = default;
};

// Per-batch-size power limit minimizing epoch cost. `profiles` must hold one
// entry per limit in `power_limits` for a single batch size. Ties go to the
// lower limit. Throws ValidationError on missing, duplicated or foreign
// entries.
PowerChoice OptimalPowerLimit(std::span<const PowerProfile> profiles,
                              std::span<const double> power_limits, double eta,
                              double max_power);

struct EpochUsage {
  double time = 0.0;    // seconds
  double energy = 0.0;  // joules

  bool operator==(const EpochUsage&) const = default;
};

// Time and energy of a just-in-time profiling epoch. The epoch is split into
// |P| equal work slices, one per power limit, so each slice costs 1/|P| of a
// full epoch at that limit.
EpochUsage ProfilingEpochCost(std::span<const PowerProfile> profiles,
                              std::span<const double> power_limits);

// Time and energy of one ordinary epoch at a fixed operating point.
EpochUsage SteadyEpochCost(const PowerProfile& profile);

// Profiles acquired so far, keyed by batch size. An entry exists only once a
// profiling epoch has been charged for that batch size.
class ProfileCache {
 public:
  struct Entry {
    std::vector<PowerProfile> profiles;  // sorted by power limit
    PowerChoice choice;
    EpochUsage profiling_epoch;
  };

  bool Contains(int batch_size) const { return entries_.contains(batch_size); }
  const Entry* Find(int batch_size) const;

  // Records a freshly profiled batch size. Throws StateError if it was
  // already profiled: profiling is charged once per batch size.
  const Entry& Insert(std::vector<PowerProfile> profiles,
                      std::span<const double> power_limits, double eta,
                      double max_power);

  const std::map<int, Entry>& entries() const { return entries_; }

 private:
  std::map<int, Entry> entries_;
};

}  // namespace recurtune
