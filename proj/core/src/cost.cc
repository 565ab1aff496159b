#include "recurtune/cost.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <tuple>

#include "recurtune/errors.h"

namespace recurtune {

double BlendedCost(double energy, double time, double eta, double max_power) {
  return eta * energy + (1.0 - eta) * max_power * time;
}

double EpochCost(const PowerProfile& profile, double eta, double max_power) {
  return (eta * profile.avg_power + (1.0 - eta) * max_power) /
         profile.throughput;
}

double JobCost(double epochs, double epoch_cost) { return epochs * epoch_cost; }

double Regret(double observed, double optimal) {
  const double tolerance = 1e-9 * std::max(1.0, std::abs(optimal));
  if (observed < optimal - tolerance) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "observed cost " << observed << " is below the oracle optimum "
        << optimal;
    throw StateError(msg.str());
  }
  return std::max(0.0, observed - optimal);
}

std::vector<double> CumulativeRegret(std::span<const double> regrets) {
  std::vector<double> out;
  out.reserve(regrets.size());
  double sum = 0.0;
  for (double r : regrets) {
    sum += r;
    out.push_back(sum);
  }
  return out;
}

ExpectedEpochs MeanConvergedEpochs(std::span<const TrainingRecord> records,
                                   int slice) {
  std::map<int, std::pair<double, int>> acc;
  for (const auto& r : records) {
    if (r.slice_index != slice || !r.converged()) continue;
    auto& [sum, n] = acc[r.batch_size];
    sum += *r.epochs_to_target;
    ++n;
  }
  ExpectedEpochs out;
  for (const auto& [b, sn] : acc) out[b] = sn.first / sn.second;
  return out;
}

Optimum BruteForceOptimum(const ExpectedEpochs& expected,
                          std::span<const PowerProfile> profiles, double eta,
                          double max_power) {
  if (expected.empty()) {
    throw StateError("no batch size converges in the trace");
  }
  bool found = false;
  Optimum best;
  for (const auto& profile : profiles) {
    auto it = expected.find(profile.batch_size);
    if (it == expected.end()) continue;
    const double cost = JobCost(it->second, EpochCost(profile, eta, max_power));
    const Config config{profile.batch_size, profile.power_limit};
    if (!found || cost < best.cost ||
        (cost == best.cost &&
         std::tie(config.batch_size, config.power_limit) <
             std::tie(best.config.batch_size, best.config.power_limit))) {
      best = {config, cost};
      found = true;
    }
  }
  if (!found) {
    throw StateError("no power profile matches a converging batch size");
  }
  return best;
}

std::vector<ParetoPoint> GridPoints(const ExpectedEpochs& expected,
                                    std::span<const PowerProfile> profiles) {
  std::vector<ParetoPoint> points;
  for (const auto& profile : profiles) {
    auto it = expected.find(profile.batch_size);
    if (it == expected.end()) continue;
    const double tta = it->second / profile.throughput;
    points.push_back({{profile.batch_size, profile.power_limit},
                      tta,
                      tta * profile.avg_power});
  }
  std::sort(points.begin(), points.end(), [](const auto& a, const auto& b) {
    return std::tie(a.config.batch_size, a.config.power_limit) <
           std::tie(b.config.batch_size, b.config.power_limit);
  });
  return points;
}

std::vector<ParetoPoint> ParetoFront(std::span<const ParetoPoint> points) {
  std::vector<ParetoPoint> sorted(points.begin(), points.end());
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const ParetoPoint& a, const ParetoPoint& b) {
                     return std::tie(a.tta, a.eta_energy, a.config.batch_size,
                                     a.config.power_limit) <
                            std::tie(b.tta, b.eta_energy, b.config.batch_size,
                                     b.config.power_limit);
                   });
  // Sweeping in TTA order, a point survives iff its ETA strictly beats
  // everything before it.
  std::vector<ParetoPoint> front;
  double best_energy = std::numeric_limits<double>::infinity();
  for (const auto& p : sorted) {
    if (p.eta_energy < best_energy) {
      front.push_back(p);
      best_energy = p.eta_energy;
    }
  }
  return front;
}

std::vector<EtaSweepRow> EtaSweep(const ExpectedEpochs& expected,
                                  std::span<const PowerProfile> profiles,
                                  std::span<const double> etas,
                                  double max_power) {
  const auto grid = GridPoints(expected, profiles);
  const auto front = ParetoFront(grid);
  std::vector<EtaSweepRow> rows;
  rows.reserve(etas.size());
  for (double eta : etas) {
    const auto opt = BruteForceOptimum(expected, profiles, eta, max_power);
    auto it = std::find_if(grid.begin(), grid.end(), [&](const auto& p) {
      return p.config == opt.config;
    });
    EtaSweepRow row;
    row.eta = eta;
    row.config = opt.config;
    row.tta = it->tta;
    row.eta_energy = it->eta_energy;
    row.cost = opt.cost;
    row.on_front = std::any_of(front.begin(), front.end(), [&](const auto& p) {
      return p.config == opt.config;
    });
    rows.push_back(row);
  }
  return rows;
}

PowerBand AvgPowerBand(std::span<const PowerProfile> profiles) {
  PowerBand band{std::numeric_limits<double>::infinity(),
                 -std::numeric_limits<double>::infinity()};
  for (const auto& p : profiles) {
    band.min_avg_power = std::min(band.min_avg_power, p.avg_power);
    band.max_avg_power = std::max(band.max_avg_power, p.avg_power);
  }
  return band;
}

}  // namespace recurtune
