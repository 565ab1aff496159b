#include "recurtune/power.h"

#include <algorithm>
#include <string>

#include "recurtune/cost.h"
#include "recurtune/errors.h"

namespace recurtune {
namespace {

std::string Watts(double p) {
  std::string s = std::to_string(p);
  s.erase(s.find_last_not_of('0') + 1);
  if (!s.empty() && s.back() == '.') s.pop_back();
  return s + " W";
}

// Returns profiles reordered to match `power_limits`.
std::vector<const PowerProfile*> MatchLimits(
    std::span<const PowerProfile> profiles,
    std::span<const double> power_limits) {
  std::vector<std::string> problems;
  if (profiles.empty()) problems.emplace_back("no power profiles given");
  if (power_limits.empty()) problems.emplace_back("power limit set is empty");
  if (!profiles.empty()) {
    const int b = profiles.front().batch_size;
    for (const auto& p : profiles) {
      if (p.batch_size != b) {
        problems.push_back("profiles mix batch sizes " + std::to_string(b) +
                           " and " + std::to_string(p.batch_size));
        break;
      }
    }
  }
  std::vector<const PowerProfile*> matched(power_limits.size(), nullptr);
  for (const auto& p : profiles) {
    auto it = std::find(power_limits.begin(), power_limits.end(), p.power_limit);
    if (it == power_limits.end()) {
      problems.push_back("profile at unknown power limit " + Watts(p.power_limit));
      continue;
    }
    auto& slot = matched[static_cast<std::size_t>(it - power_limits.begin())];
    if (slot != nullptr) {
      problems.push_back("duplicated power limit " + Watts(p.power_limit));
    }
    slot = &p;
  }
  for (std::size_t i = 0; i < matched.size(); ++i) {
    if (matched[i] == nullptr) {
      problems.push_back("missing power limit " + Watts(power_limits[i]));
    }
  }
  if (!problems.empty()) throw ValidationError(std::move(problems));
  return matched;
}

}  // namespace

PowerChoice OptimalPowerLimit(std::span<const PowerProfile> profiles,
                              std::span<const double> power_limits, double eta,
                              double max_power) {
  const auto matched = MatchLimits(profiles, power_limits);
  PowerChoice best{0.0, 0.0};
  bool found = false;
  for (const PowerProfile* p : matched) {
    const double cost = EpochCost(*p, eta, max_power);
    if (!found || cost < best.epoch_cost ||
        (cost == best.epoch_cost && p->power_limit < best.power_limit)) {
      best = {p->power_limit, cost};
      found = true;
    }
  }
  return best;
}

EpochUsage ProfilingEpochCost(std::span<const PowerProfile> profiles,
                              std::span<const double> power_limits) {
  const auto matched = MatchLimits(profiles, power_limits);
  const double share = 1.0 / static_cast<double>(matched.size());
  EpochUsage usage;
  for (const PowerProfile* p : matched) {
    const auto slice = SteadyEpochCost(*p);
    usage.time += share * slice.time;
    usage.energy += share * slice.energy;
  }
  return usage;
}

EpochUsage SteadyEpochCost(const PowerProfile& profile) {
  const double time = 1.0 / profile.throughput;
  return {time, profile.avg_power * time};
}

const ProfileCache::Entry* ProfileCache::Find(int batch_size) const {
  auto it = entries_.find(batch_size);
  return it == entries_.end() ? nullptr : &it->second;
}

const ProfileCache::Entry& ProfileCache::Insert(
    std::vector<PowerProfile> profiles, std::span<const double> power_limits,
    double eta, double max_power) {
  Entry entry;
  entry.choice = OptimalPowerLimit(profiles, power_limits, eta, max_power);
  entry.profiling_epoch = ProfilingEpochCost(profiles, power_limits);
  const int b = profiles.front().batch_size;
  if (Contains(b)) {
    throw StateError("batch size " + std::to_string(b) + " already profiled");
  }
  std::sort(profiles.begin(), profiles.end(),
            [](const auto& x, const auto& y) {
              return x.power_limit < y.power_limit;
            });
  entry.profiles = std::move(profiles);
  return entries_.emplace(b, std::move(entry)).first->second;
}

}  // namespace recurtune
