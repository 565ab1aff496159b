#pragma once

#include <map>
#include <span>
#include <vector>

#include "recurtune/domain.h"

namespace recurtune {

// Blended energy-time cost: eta*energy + (1-eta)*max_power*time.
double BlendedCost(double energy, double time, double eta, double max_power);

// Cost of one epoch at a measured (avg power, throughput) operating point.
double EpochCost(const PowerProfile& profile, double eta, double max_power);

double JobCost(double epochs, double epoch_cost);

// Per-recurrence regret against the oracle optimum. Throws StateError when
// `observed` undercuts `optimal` beyond rounding, which means the oracle was
// computed over different data than the observation.
double Regret(double observed, double optimal);

std::vector<double> CumulativeRegret(std::span<const double> regrets);

// Expected epochs-to-target per batch size.
using ExpectedEpochs = std::map<int, double>;

// Arithmetic mean of converged replicas per batch size within one slice.
// Batch sizes without a converged replica are absent from the result.
ExpectedEpochs MeanConvergedEpochs(std::span<const TrainingRecord> records,
                                   int slice = 0);

struct Optimum {
  Config config;
  double cost = 0.0;

  bool operator==(const Optimum&) const = default;
};

// Exhaustive argmin of expected job cost over every (b, p) whose batch size
// appears in `expected`. Ties go to the smaller batch size, then the smaller
// power limit. Throws StateError if nothing converges.
Optimum BruteForceOptimum(const ExpectedEpochs& expected,
                          std::span<const PowerProfile> profiles, double eta,
                          double max_power);

struct ParetoPoint {
  Config config;
  double tta = 0.0;         // seconds
  double eta_energy = 0.0;  // joules

  bool operator==(const ParetoPoint&) const = default;
};

// (TTA, ETA) of every grid configuration whose batch size converges, in
// (b, p) order.
std::vector<ParetoPoint> GridPoints(const ExpectedEpochs& expected,
                                    std::span<const PowerProfile> profiles);

// Non-dominated subset sorted by ascending TTA. Points identical on both axes
// keep only the first in (b, p) order.
std::vector<ParetoPoint> ParetoFront(std::span<const ParetoPoint> points);

struct EtaSweepRow {
  double eta = 0.0;
  Config config;
  double tta = 0.0;
  double eta_energy = 0.0;
  double cost = 0.0;
  bool on_front = false;
};

std::vector<EtaSweepRow> EtaSweep(const ExpectedEpochs& expected,
                                  std::span<const PowerProfile> profiles,
                                  std::span<const double> etas,
                                  double max_power);

// Min and max average power over the grid. The two lines bounding the
// (TTA, ETA) scatter have these slopes.
struct PowerBand {
  double min_avg_power = 0.0;
  double max_avg_power = 0.0;
};
PowerBand AvgPowerBand(std::span<const PowerProfile> profiles);

}  // namespace recurtune
