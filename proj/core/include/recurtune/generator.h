#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "recurtune/traceio.h"

namespace recurtune {

// From `slice` onward the expected-epochs curve is centered on a new batch
// size.
struct DriftPoint {
  int slice = 0;
  int optimal_batch_size = 0;

  bool operator==(const DriftPoint&) const = default;
};

// Curve parameters of the synthetic trace generator.
//
//   util(b)      = min(1, utilization * (b/b*)^utilization_exponent)
//   AvgPower     = idle + util(b) * (p - idle)
//   Throughput   = peak * (b/b*)^alpha * (1 - e^(-k p/M)) / (1 - e^(-k))
//   E[Epochs](b) = base * (1 + c ln^2(b/b*_s)) * e1(b*) / e1(b)
//
// where e1(b) is the smallest per-epoch energy over the power limits and b*
// is the slice-0 optimum. The e1 ratio makes b*_s the energy-optimal batch
// size of every slice, with the same optimal cost in each.
struct GeneratorParams {
  std::string job_id = "synthetic";
  std::vector<int> batch_sizes;
  std::vector<double> power_limits;
  int default_batch_size = 0;
  double max_power = 0.0;
  int optimal_batch_size = 0;

  double base_epochs = 40.0;
  double curvature = 0.5;
  double idle_power = 70.0;
  double utilization = 0.8;
  double utilization_exponent = 0.0;
  double peak_throughput = 0.01;  // epochs/s at b* and max power
  double throughput_exponent = 0.3;
  double saturation = 4.0;

  double noise = 0.0;  // relative stddev of per-replica epochs
  int replicas = 4;
  int slices = 1;
  std::vector<DriftPoint> drift;  // strictly increasing slices

  // Batch sizes outside this range never reach the target.
  std::optional<int> converge_min_batch_size;
  std::optional<int> converge_max_batch_size;
  // Defaults to three times the largest expected epoch count. Replicas that
  // would need more never converge.
  std::optional<int> max_epochs;

  bool operator==(const GeneratorParams&) const = default;
};

std::vector<std::string> ValidateGeneratorParams(const GeneratorParams& params);

// Analytic model, exposed for tests.
double SyntheticAvgPower(const GeneratorParams& params, int batch_size,
                         double power_limit);
double SyntheticThroughput(const GeneratorParams& params, int batch_size,
                           double power_limit);
// nullopt when `batch_size` never converges.
std::optional<double> SyntheticExpectedEpochs(const GeneratorParams& params,
                                              int batch_size, int slice);
int SliceOptimalBatchSize(const GeneratorParams& params, int slice);

// Builds a complete bundle with ground truth. Throws ValidationError on bad
// parameters.
TraceBundle GenerateSynthetic(const GeneratorParams& params,
                              std::uint64_t seed);

// Multi-slice bundle whose optimal batch size moves at each change point.
TraceBundle DriftSlices(GeneratorParams base, int slices,
                        std::vector<DriftPoint> change_points,
                        std::uint64_t seed);

// Named parameter sets: "deepspeech2-like" and "balanced-6x5".
std::vector<std::string> PresetNames();
GeneratorParams Preset(const std::string& name);

nlohmann::json ToJson(const GeneratorParams& params);

}  // namespace recurtune
