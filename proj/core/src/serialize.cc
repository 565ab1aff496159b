#include "recurtune/serialize.h"

#include <cmath>

namespace recurtune {
namespace {

using nlohmann::json;

template <typename T>
json Nullable(const std::optional<T>& v) {
  return v ? json(*v) : json();
}

template <typename T>
std::optional<T> ReadNullable(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<T>();
}

// Infinity has no JSON spelling; null stands for it.
json Unbounded(double v) { return std::isinf(v) ? json() : json(v); }

double ReadUnbounded(const json& j, const char* key) {
  const auto& v = j.at(key);
  return v.is_null() ? kFlatPrior : v.get<double>();
}

}  // namespace

void to_json(json& j, const JobSpec& v) {
  j = json{{"job_id", v.job_id},
           {"batch_sizes", v.batch_sizes},
           {"power_limits", v.power_limits},
           {"default_batch_size", v.default_batch_size},
           {"max_power", v.max_power},
           {"eta", v.eta},
           {"beta", v.beta},
           {"recurrences", v.recurrences},
           {"window", Nullable(v.window)},
           {"max_epochs", v.max_epochs},
           {"rng_seed", v.rng_seed}};
}

void from_json(const json& j, JobSpec& v) {
  j.at("job_id").get_to(v.job_id);
  j.at("batch_sizes").get_to(v.batch_sizes);
  j.at("power_limits").get_to(v.power_limits);
  j.at("default_batch_size").get_to(v.default_batch_size);
  j.at("max_power").get_to(v.max_power);
  j.at("eta").get_to(v.eta);
  j.at("beta").get_to(v.beta);
  j.at("recurrences").get_to(v.recurrences);
  v.window = ReadNullable<int>(j, "window");
  j.at("max_epochs").get_to(v.max_epochs);
  j.at("rng_seed").get_to(v.rng_seed);
}

void to_json(json& j, const Config& v) {
  j = json{{"batch_size", v.batch_size}, {"power_limit", v.power_limit}};
}

void from_json(const json& j, Config& v) {
  j.at("batch_size").get_to(v.batch_size);
  j.at("power_limit").get_to(v.power_limit);
}

void to_json(json& j, const CostSample& v) {
  j = json{{"recurrence", v.recurrence}, {"config", v.config},
           {"energy", v.energy},         {"time", v.time},
           {"cost", v.cost},             {"epochs_run", v.epochs_run},
           {"converged", v.converged},   {"early_stopped", v.early_stopped},
           {"profiled", v.profiled}};
}

void from_json(const json& j, CostSample& v) {
  j.at("recurrence").get_to(v.recurrence);
  j.at("config").get_to(v.config);
  j.at("energy").get_to(v.energy);
  j.at("time").get_to(v.time);
  j.at("cost").get_to(v.cost);
  j.at("epochs_run").get_to(v.epochs_run);
  j.at("converged").get_to(v.converged);
  j.at("early_stopped").get_to(v.early_stopped);
  j.at("profiled").get_to(v.profiled);
}

void to_json(json& j, const Optimum& v) {
  j = json{{"config", v.config}, {"cost", v.cost}};
}

void from_json(const json& j, Optimum& v) {
  j.at("config").get_to(v.config);
  j.at("cost").get_to(v.cost);
}

void to_json(json& j, const ArmState& v) {
  j = json{{"batch_size", v.batch_size},
           {"window", Nullable(v.window)},
           {"history", v.history},
           {"prior_mean", v.prior_mean},
           {"prior_variance", Unbounded(v.prior_variance)},
           {"posterior_mean", v.posterior_mean},
           {"posterior_variance", Unbounded(v.posterior_variance)},
           {"has_posterior", v.has_posterior}};
}

void from_json(const json& j, ArmState& v) {
  j.at("batch_size").get_to(v.batch_size);
  v.window = ReadNullable<std::size_t>(j, "window");
  v.history = j.at("history").get<std::deque<double>>();
  j.at("prior_mean").get_to(v.prior_mean);
  v.prior_variance = ReadUnbounded(j, "prior_variance");
  j.at("posterior_mean").get_to(v.posterior_mean);
  v.posterior_variance = ReadUnbounded(j, "posterior_variance");
  j.at("has_posterior").get_to(v.has_posterior);
}

void to_json(json& j, const RecurrenceRecord& v) {
  j = json{{"recurrence", v.recurrence}, {"slice", v.slice},
           {"phase", v.phase},           {"sample", v.sample},
           {"threshold", Nullable(v.threshold)}, {"regret", v.regret}};
}

void from_json(const json& j, RecurrenceRecord& v) {
  j.at("recurrence").get_to(v.recurrence);
  j.at("slice").get_to(v.slice);
  j.at("phase").get_to(v.phase);
  j.at("sample").get_to(v.sample);
  v.threshold = ReadNullable<double>(j, "threshold");
  j.at("regret").get_to(v.regret);
}

void to_json(json& j, const ExperimentResult& v) {
  json optimum = json::array();
  for (const auto& [slice, opt] : v.optimum) {
    optimum.push_back({{"slice", slice}, {"optimum", opt}});
  }
  j = json{{"policy", v.policy},
           {"seed", v.seed},
           {"job", v.job},
           {"records", v.records},
           {"cumulative_regret", v.cumulative_regret},
           {"report_order", v.report_order},
           {"optimum", optimum}};
}

void from_json(const json& j, ExperimentResult& v) {
  j.at("policy").get_to(v.policy);
  j.at("seed").get_to(v.seed);
  j.at("job").get_to(v.job);
  j.at("records").get_to(v.records);
  j.at("cumulative_regret").get_to(v.cumulative_regret);
  j.at("report_order").get_to(v.report_order);
  v.optimum.clear();
  for (const auto& o : j.at("optimum")) {
    v.optimum.emplace(o.at("slice").get<int>(), o.at("optimum").get<Optimum>());
  }
}

}  // namespace recurtune
