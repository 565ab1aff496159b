#include "recurtune/generator.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "recurtune/errors.h"
#include "recurtune/rng.h"

namespace recurtune {
namespace {

bool Contains(const std::vector<int>& v, int x) {
  return std::find(v.begin(), v.end(), x) != v.end();
}

double Utilization(const GeneratorParams& g, int b) {
  const double ratio = static_cast<double>(b) / g.optimal_batch_size;
  return std::min(1.0, g.utilization * std::pow(ratio, g.utilization_exponent));
}

// Smallest per-epoch energy of batch size b over the power limits.
double MinEpochEnergy(const GeneratorParams& g, int b) {
  double best = std::numeric_limits<double>::infinity();
  for (double p : g.power_limits) {
    best = std::min(best, SyntheticAvgPower(g, b, p) / SyntheticThroughput(g, b, p));
  }
  return best;
}

bool Converges(const GeneratorParams& g, int b) {
  if (g.converge_min_batch_size && b < *g.converge_min_batch_size) return false;
  if (g.converge_max_batch_size && b > *g.converge_max_batch_size) return false;
  return true;
}

double MaxExpectedEpochs(const GeneratorParams& g) {
  double most = 0.0;
  for (int s = 0; s < g.slices; ++s) {
    for (int b : g.batch_sizes) {
      if (auto e = SyntheticExpectedEpochs(g, b, s)) most = std::max(most, *e);
    }
  }
  return most;
}

}  // namespace

std::vector<std::string> ValidateGeneratorParams(const GeneratorParams& g) {
  std::vector<std::string> problems;
  if (g.job_id.empty() || g.job_id.find_first_of(",\n\r") != std::string::npos) {
    problems.emplace_back("job_id must be non-empty without commas");
  }
  if (g.batch_sizes.empty()) problems.emplace_back("no batch sizes");
  if (g.power_limits.empty()) problems.emplace_back("no power limits");
  if (std::adjacent_find(g.batch_sizes.begin(), g.batch_sizes.end(),
                         std::greater_equal<>()) != g.batch_sizes.end()) {
    problems.emplace_back("batch sizes not strictly increasing");
  }
  if (std::adjacent_find(g.power_limits.begin(), g.power_limits.end(),
                         std::greater_equal<>()) != g.power_limits.end()) {
    problems.emplace_back("power limits not strictly increasing");
  }
  if (!g.batch_sizes.empty() && g.batch_sizes.front() <= 0) {
    problems.emplace_back("batch sizes must be positive");
  }
  if (!Contains(g.batch_sizes, g.default_batch_size)) {
    problems.emplace_back("default batch size not in set");
  }
  if (!Contains(g.batch_sizes, g.optimal_batch_size)) {
    problems.emplace_back("optimal batch size not in set");
  }
  if (!g.power_limits.empty() && !(g.max_power >= g.power_limits.back())) {
    problems.emplace_back("max power below the largest power limit");
  }
  if (!g.power_limits.empty() && !(g.idle_power > 0.0 && g.idle_power < g.power_limits.front())) {
    problems.emplace_back("idle power must be positive and below every power limit");
  }
  if (!(g.utilization > 0.0 && g.utilization <= 1.0)) {
    problems.emplace_back("utilization out of (0,1]");
  }
  if (!(g.utilization_exponent >= 0.0)) {
    problems.emplace_back("utilization exponent must be non-negative");
  }
  // Throughput must rise with p; a non-positive saturation would flatten
  // or invert it.
  if (!(g.saturation > 0.0) || !std::isfinite(g.saturation)) {
    problems.emplace_back("non-monotone throughput: saturation must be positive");
  }
  if (!(g.peak_throughput > 0.0)) problems.emplace_back("peak throughput must be positive");
  if (!std::isfinite(g.throughput_exponent)) {
    problems.emplace_back("throughput exponent must be finite");
  }
  if (!(g.base_epochs >= 1.0)) problems.emplace_back("base epochs must be at least 1");
  if (!(g.curvature >= 0.0)) problems.emplace_back("curvature must be non-negative");
  if (!(g.noise >= 0.0 && g.noise < 1.0)) problems.emplace_back("noise out of [0,1)");
  if (g.replicas < 1) problems.emplace_back("need at least one replica");
  if (g.slices < 1) problems.emplace_back("need at least one slice");
  if (g.max_epochs && *g.max_epochs < 1) problems.emplace_back("max epochs must be positive");
  int last_slice = 0;
  for (const auto& d : g.drift) {
    if (d.slice <= last_slice || d.slice >= g.slices) {
      problems.push_back("invalid change point at slice " + std::to_string(d.slice));
    }
    if (!Contains(g.batch_sizes, d.optimal_batch_size)) {
      problems.push_back("change point batch size " + std::to_string(d.optimal_batch_size) +
                         " not in set");
    }
    last_slice = std::max(last_slice, d.slice);
  }
  if (!problems.empty()) return problems;

  bool any = false;
  for (int b : g.batch_sizes) any = any || Converges(g, b);
  if (!any) problems.emplace_back("no batch size converges");
  for (int s = 0; s < g.slices; ++s) {
    if (!Converges(g, SliceOptimalBatchSize(g, s))) {
      problems.push_back("optimal batch size of slice " + std::to_string(s) +
                         " never converges");
    }
  }
  // Discrete convexity over log b of the expected-epochs curve.
  for (int s = 0; s < g.slices && problems.empty(); ++s) {
    for (std::size_t i = 1; i + 1 < g.batch_sizes.size(); ++i) {
      const int b0 = g.batch_sizes[i - 1], b1 = g.batch_sizes[i], b2 = g.batch_sizes[i + 1];
      if (!Converges(g, b0) || !Converges(g, b2)) continue;
      const double x0 = std::log(b0), x1 = std::log(b1), x2 = std::log(b2);
      const double y0 = *SyntheticExpectedEpochs(g, b0, s);
      const double y1 = *SyntheticExpectedEpochs(g, b1, s);
      const double y2 = *SyntheticExpectedEpochs(g, b2, s);
      const double chord = y0 + (y2 - y0) * (x1 - x0) / (x2 - x0);
      if (y1 > chord * (1.0 + 1e-12)) {
        problems.push_back("expected epochs not convex in log batch size at b=" +
                           std::to_string(b1) + ", slice " + std::to_string(s));
        break;
      }
    }
  }
  return problems;
}

double SyntheticAvgPower(const GeneratorParams& g, int batch_size, double power_limit) {
  return g.idle_power + Utilization(g, batch_size) * (power_limit - g.idle_power);
}

double SyntheticThroughput(const GeneratorParams& g, int batch_size, double power_limit) {
  const double ratio = static_cast<double>(batch_size) / g.optimal_batch_size;
  const double k = g.saturation;
  return g.peak_throughput * std::pow(ratio, g.throughput_exponent) *
         (-std::expm1(-k * power_limit / g.max_power)) / (-std::expm1(-k));
}

int SliceOptimalBatchSize(const GeneratorParams& g, int slice) {
  int b = g.optimal_batch_size;
  for (const auto& d : g.drift) {
    if (d.slice <= slice) b = d.optimal_batch_size;
  }
  return b;
}

std::optional<double> SyntheticExpectedEpochs(const GeneratorParams& g, int batch_size,
                                              int slice) {
  if (!Converges(g, batch_size)) return std::nullopt;
  const double x = std::log(static_cast<double>(batch_size) / SliceOptimalBatchSize(g, slice));
  return g.base_epochs * (1.0 + g.curvature * x * x) *
         MinEpochEnergy(g, g.optimal_batch_size) / MinEpochEnergy(g, batch_size);
}

TraceBundle GenerateSynthetic(const GeneratorParams& g, std::uint64_t seed) {
  auto problems = ValidateGeneratorParams(g);
  if (!problems.empty()) throw ValidationError(std::move(problems));

  const int max_epochs =
      g.max_epochs.value_or(static_cast<int>(std::ceil(3.0 * MaxExpectedEpochs(g))));
  Rng rng(seed);
  std::vector<PowerProfile> power;
  std::vector<TrainingRecord> training;
  std::vector<GroundTruthRow> truth;
  for (int s = 0; s < g.slices; ++s) {
    for (int b : g.batch_sizes) {
      for (double p : g.power_limits) {
        power.push_back({b, p, SyntheticAvgPower(g, b, p), SyntheticThroughput(g, b, p), s});
      }
      const auto mean = SyntheticExpectedEpochs(g, b, s);
      truth.push_back({b, s, mean});
      for (int r = 0; r < g.replicas; ++r) {
        TrainingRecord rec{b, r, std::nullopt, s};
        if (mean) {
          const double z = g.noise > 0.0 ? rng.Normal() : 0.0;
          const auto epochs = std::max<long long>(1, std::llround(*mean * (1.0 + g.noise * z)));
          if (epochs <= max_epochs) rec.epochs_to_target = static_cast<int>(epochs);
        }
        training.push_back(rec);
      }
    }
  }
  BundleMetadata meta;
  meta.job_id = g.job_id;
  meta.default_batch_size = g.default_batch_size;
  meta.max_power = g.max_power;
  meta.max_epochs = max_epochs;
  meta.units = {{"avg_power", "W"},
                {"max_power", "W"},
                {"power_limit", "W"},
                {"throughput", "epochs/s"}};
  meta.generator = {{"params", ToJson(g)}, {"seed", seed}};
  return TraceBundle::Create(std::move(meta), std::move(power), std::move(training),
                             std::move(truth));
}

TraceBundle DriftSlices(GeneratorParams base, int slices,
                        std::vector<DriftPoint> change_points, std::uint64_t seed) {
  base.slices = slices;
  base.drift = std::move(change_points);
  return GenerateSynthetic(base, seed);
}

std::vector<std::string> PresetNames() { return {"balanced-6x5", "deepspeech2-like"}; }

GeneratorParams Preset(const std::string& name) {
  GeneratorParams g;
  if (name == "deepspeech2-like") {
    g.job_id = "deepspeech2-like";
    g.batch_sizes = {8, 16, 24, 32, 48, 64, 96, 128, 192};
    g.power_limits = {100, 125, 150, 175, 200, 225, 250};
    g.default_batch_size = 192;
    g.max_power = 250;
    g.optimal_batch_size = 32;
    g.base_epochs = 80;
    g.curvature = 0.15;
    g.utilization = 0.5;
    g.utilization_exponent = 0.5;
    g.throughput_exponent = 0.5;
    g.saturation = 4.0;
    g.peak_throughput = 0.01;
    g.noise = 0.05;
    return g;
  }
  if (name == "balanced-6x5") {
    g.job_id = "balanced-6x5";
    g.batch_sizes = {8, 16, 32, 64, 128, 256};
    g.power_limits = {100, 125, 150, 200, 250};
    g.default_batch_size = 128;
    g.max_power = 250;
    g.optimal_batch_size = 32;
    g.base_epochs = 40;
    g.curvature = 0.5;
    g.utilization = 0.8;
    g.throughput_exponent = 0.3;
    g.noise = 0.05;
    return g;
  }
  throw ValidationError({"unknown preset '" + name + "'"});
}

nlohmann::json ToJson(const GeneratorParams& g) {
  nlohmann::json j = {
      {"job_id", g.job_id},
      {"batch_sizes", g.batch_sizes},
      {"power_limits", g.power_limits},
      {"default_batch_size", g.default_batch_size},
      {"max_power", g.max_power},
      {"optimal_batch_size", g.optimal_batch_size},
      {"base_epochs", g.base_epochs},
      {"curvature", g.curvature},
      {"idle_power", g.idle_power},
      {"utilization", g.utilization},
      {"utilization_exponent", g.utilization_exponent},
      {"peak_throughput", g.peak_throughput},
      {"throughput_exponent", g.throughput_exponent},
      {"saturation", g.saturation},
      {"noise", g.noise},
      {"replicas", g.replicas},
      {"slices", g.slices},
  };
  auto& drift = j["drift"] = nlohmann::json::array();
  for (const auto& d : g.drift) {
    drift.push_back({{"slice", d.slice}, {"optimal_batch_size", d.optimal_batch_size}});
  }
  j["converge_min_batch_size"] =
      g.converge_min_batch_size ? nlohmann::json(*g.converge_min_batch_size) : nlohmann::json();
  j["converge_max_batch_size"] =
      g.converge_max_batch_size ? nlohmann::json(*g.converge_max_batch_size) : nlohmann::json();
  j["max_epochs"] = g.max_epochs ? nlohmann::json(*g.max_epochs) : nlohmann::json();
  return j;
}

}  // namespace recurtune
