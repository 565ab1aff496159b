#include "cli.h"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <sstream>

#include "recurtune/cost.h"
#include "recurtune/errors.h"
#include "recurtune/generator.h"
#include "recurtune/sim.h"
#include "recurtune/traceio.h"
#include "results.h"

namespace recurtune::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Bad flag values discovered after parsing.
class UsageError : public Error {
 public:
  using Error::Error;
};

// Inputs that parse but disagree, e.g. results from different bundles.
class MismatchError : public Error {
 public:
  using Error::Error;
};

std::optional<fs::path> DefaultOutputDir() {
  const char* dir = std::getenv(kOutputDirEnv);
  if (dir == nullptr || *dir == '\0') return std::nullopt;
  return fs::path(dir);
}

// Resolves --out: explicit path, else a file in the env directory, else "-"
// for stdout.
std::string ResolveOut(const std::string& flag, const std::string& default_name) {
  if (!flag.empty()) return flag;
  if (auto dir = DefaultOutputDir()) return (*dir / default_name).string();
  return "-";
}

void Emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path == "-") {
    out << text;
    return;
  }
  const fs::path p(path);
  if (p.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(p.parent_path(), ec);
    if (ec) throw IoError("cannot create " + p.parent_path().string() + ": " + ec.message());
  }
  WriteFile(p, text);
}

Format ParseFormat(const std::string& s) {
  if (s == "csv") return Format::kCsv;
  if (s == "json") return Format::kJson;
  throw UsageError("--format must be csv or json");
}

std::vector<double> ParseDoubleList(const std::string& text, const char* flag) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const double v = std::stod(item, &used);
      if (used != item.size() || !std::isfinite(v)) throw std::invalid_argument(item);
      values.push_back(v);
    } catch (const std::exception&) {
      throw UsageError(std::string(flag) + ": invalid number '" + item + "'");
    }
  }
  if (values.empty()) throw UsageError(std::string(flag) + " is empty");
  return values;
}

std::pair<int, int> ParsePair(const std::string& text, const char* flag) {
  const auto colon = text.find(':');
  try {
    if (colon == std::string::npos) throw std::invalid_argument(text);
    std::size_t a = 0, b = 0;
    const int first = std::stoi(text.substr(0, colon), &a);
    const int second = std::stoi(text.substr(colon + 1), &b);
    if (a != colon || b != text.size() - colon - 1) throw std::invalid_argument(text);
    return {first, second};
  } catch (const std::exception&) {
    throw UsageError(std::string(flag) + ": expected A:B, got '" + text + "'");
  }
}

// ---- gen -------------------------------------------------------------------

struct GenFlags {
  std::string preset = "deepspeech2-like";
  std::uint64_t seed = 0;
  std::string out;
  std::optional<double> noise;
  std::optional<int> replicas;
  std::optional<int> slices;
  std::vector<std::string> drift;
  std::optional<int> max_epochs;
};

int CmdGen(const GenFlags& f, std::ostream& out) {
  const auto names = PresetNames();
  if (std::find(names.begin(), names.end(), f.preset) == names.end()) {
    throw UsageError("unknown preset '" + f.preset + "'");
  }
  GeneratorParams params = Preset(f.preset);
  if (f.noise) params.noise = *f.noise;
  if (f.replicas) params.replicas = *f.replicas;
  if (f.slices) params.slices = *f.slices;
  if (f.max_epochs) params.max_epochs = *f.max_epochs;
  for (const auto& d : f.drift) {
    const auto [slice, b] = ParsePair(d, "--drift");
    params.drift.push_back({slice, b});
  }
  if (auto problems = ValidateGeneratorParams(params); !problems.empty()) {
    std::string msg = "invalid generator flags:";
    for (const auto& p : problems) msg += "\n  " + p;
    throw UsageError(msg);
  }
  const TraceBundle bundle = GenerateSynthetic(params, f.seed);
  fs::path dir = f.out;
  if (dir.empty()) dir = DefaultOutputDir().value_or(fs::path(".")) / f.preset;
  WriteBundle(bundle, dir);
  out << ManifestJson(bundle).dump(2) << "\n";
  return kOk;
}

// ---- shared simulate/sweep flags --------------------------------------------

struct RunFlags {
  std::string trace;
  double eta = 0.5;
  double beta = 2.0;
  std::string recurrences = "auto";
  std::string window = "inf";
  std::uint64_t seed = 0;
};

int ResolveRecurrences(const std::string& flag, const TraceBundle& bundle) {
  if (flag == "auto") {
    return static_cast<int>(2 * bundle.batch_sizes().size() * bundle.power_limits().size());
  }
  try {
    std::size_t used = 0;
    const int n = std::stoi(flag, &used);
    if (used != flag.size() || n < 1) throw std::invalid_argument(flag);
    return n;
  } catch (const std::exception&) {
    throw UsageError("--recurrences must be a positive integer or 'auto'");
  }
}

std::optional<int> ResolveWindow(const std::string& flag) {
  if (flag == "inf") return std::nullopt;
  try {
    std::size_t used = 0;
    const int n = std::stoi(flag, &used);
    if (used != flag.size() || n < 2) throw std::invalid_argument(flag);
    return n;
  } catch (const std::exception&) {
    throw UsageError("--window must be an integer >= 2 or 'inf'");
  }
}

JobSpec ResolveJob(const RunFlags& f, const TraceBundle& bundle) {
  JobSpec job = JobFromBundle(bundle, f.eta, f.beta, ResolveRecurrences(f.recurrences, bundle),
                              ResolveWindow(f.window), f.seed);
  if (auto problems = Validate(job); !problems.empty()) {
    std::string msg = "invalid flags:";
    for (const auto& p : problems) msg += "\n  " + p;
    throw UsageError(msg);
  }
  return job;
}

json JobParams(const JobSpec& job) {
  return {{"eta", job.eta},
          {"beta", job.beta},
          {"recurrences", job.recurrences},
          {"window", job.window ? json(*job.window) : json("inf")},
          {"seed", job.rng_seed}};
}

SliceMap ResolveSliceMap(const std::string& flag, const TraceBundle& bundle, int recurrences) {
  if (flag.empty()) {
    return bundle.slices().size() > 1
               ? SliceMap::Even(static_cast<int>(bundle.slices().size()), recurrences)
               : SliceMap{};
  }
  if (flag == "even") {
    return SliceMap::Even(static_cast<int>(bundle.slices().size()), recurrences);
  }
  SliceMap map;
  std::stringstream ss(flag);
  std::string item;
  while (std::getline(ss, item, ',')) map.starts.push_back(ParsePair(item, "--slice-map"));
  for (std::size_t i = 1; i < map.starts.size(); ++i) {
    if (map.starts[i].first <= map.starts[i - 1].first) {
      throw UsageError("--slice-map starts must be strictly increasing");
    }
  }
  return map;
}

json SliceMapJson(const SliceMap& map) {
  json j = json::array();
  for (const auto& [start, slice] : map.starts) j.push_back({start, slice});
  return j;
}

ArrivalSchedule LoadSchedule(const std::string& path) {
  const std::string text = ReadFile(path);
  ArrivalSchedule schedule;
  std::istringstream in(text);
  std::string line;
  std::size_t number = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      if (line != "recurrence,submit_time_s") {
        throw ParseError(path, number, "expected header 'recurrence,submit_time_s'");
      }
      header = true;
      continue;
    }
    const auto comma = line.find(',');
    try {
      if (comma == std::string::npos) throw std::invalid_argument(line);
      std::size_t a = 0, b = 0;
      const int t = std::stoi(line.substr(0, comma), &a);
      const double at = std::stod(line.substr(comma + 1), &b);
      if (a != comma || b != line.size() - comma - 1) throw std::invalid_argument(line);
      schedule.submissions.emplace_back(t, at);
    } catch (const std::exception&) {
      throw ParseError(path, number, "invalid schedule row '" + line + "'");
    }
  }
  if (!header) throw ParseError(path, 0, "missing header");
  return schedule;
}

std::string ExperimentLog(const ExperimentResult& result) {
  std::string log;
  std::string phase;
  for (const auto& r : result.records) {
    const std::string base = r.phase.substr(0, r.phase.find(":concurrent"));
    if (base != phase) {
      log += "recurrence " + std::to_string(r.recurrence) + ": phase " +
             (phase.empty() ? std::string("start") : phase) + " -> " + base + "\n";
      phase = base;
    }
    const auto& s = r.sample;
    log += "recurrence " + std::to_string(r.recurrence) + ": " + r.phase +
           " batch_size=" + std::to_string(s.config.batch_size) +
           " power_limit_w=" + FormatDouble(s.config.power_limit) +
           " cost_j=" + FormatDouble(s.cost) +
           (s.converged ? " converged" : s.early_stopped ? " early_stopped" : " failed") +
           (s.profiled ? " profiled" : "") + "\n";
  }
  return log;
}

// ---- simulate ----------------------------------------------------------------

struct SimulateFlags {
  RunFlags run;
  std::string policy = "zeus";
  std::string schedule;
  std::string slice_map;
  std::string format = "csv";
  std::string out;
  std::string log;
};

int CmdSimulate(const SimulateFlags& f, std::ostream& out) {
  const auto kind = ParsePolicyKind(f.policy);
  if (!kind) throw UsageError("--policy must be zeus, grid or default");
  const Format format = ParseFormat(f.format);
  const TraceBundle bundle = LoadBundle(f.run.trace);
  const JobSpec job = ResolveJob(f.run, bundle);

  ExperimentOptions options;
  options.policy = *kind;
  options.slices = ResolveSliceMap(f.slice_map, bundle, job.recurrences);
  json params = JobParams(job);
  params["policy"] = PolicyName(*kind);
  params["slice_map"] = SliceMapJson(options.slices);
  params["schedule"] = nullptr;
  if (!f.schedule.empty()) {
    options.schedule = LoadSchedule(f.schedule);
    if (auto problems = ValidateSchedule(*options.schedule, job.recurrences); !problems.empty()) {
      throw ValidationError(std::move(problems));
    }
    params["schedule"] = Sha256Hex(ReadFile(f.schedule));
  }

  const ExperimentResult result = RunExperiment(job, bundle, options);
  const ExperimentResult baseline =
      *kind == PolicyKind::kDefault
          ? result
          : RunExperiment(job, bundle, ExperimentOptions{PolicyKind::kDefault, std::nullopt,
                                                         options.slices});

  const std::string path =
      ResolveOut(f.out, std::string("simulate-") + PolicyName(*kind) + "-seed" +
                            std::to_string(job.rng_seed) + "." + f.format);
  RunManifest manifest{"simulate", params, BundleHash(bundle), {path}};
  if (!f.log.empty()) manifest.outputs.push_back(f.log);
  Emit(path, FormatResults(manifest, Summarize(result, baseline), result, format), out);
  if (!f.log.empty()) Emit(f.log, ExperimentLog(result), out);
  return kOk;
}

// ---- sweep -------------------------------------------------------------------

struct SweepFlags {
  RunFlags run;
  std::string eta_grid = "0,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1";
  std::string beta_grid;
  int seeds = 1;
  int slice = 0;
  std::string format = "csv";
  std::string out;
};

int CmdSweep(const SweepFlags& f, std::ostream& out) {
  const Format format = ParseFormat(f.format);
  if (f.seeds < 1) throw UsageError("--seeds must be positive");
  const auto etas = ParseDoubleList(f.eta_grid, "--eta-grid");
  for (double eta : etas) {
    if (eta < 0.0 || eta > 1.0) throw UsageError("--eta-grid values must lie in [0,1]");
  }
  std::vector<double> betas;
  if (!f.beta_grid.empty()) {
    betas = ParseDoubleList(f.beta_grid, "--beta-grid");
    for (double b : betas) {
      if (!(b > 1.0)) throw UsageError("--beta-grid values must exceed 1");
    }
  }
  const TraceBundle bundle = LoadBundle(f.run.trace);
  const JobSpec job = ResolveJob(f.run, bundle);
  if (!std::binary_search(bundle.slices().begin(), bundle.slices().end(), f.slice)) {
    throw UsageError("--slice " + std::to_string(f.slice) + " not in the bundle");
  }

  const auto expected = MeanConvergedEpochs(bundle.SliceRecords(f.slice), f.slice);
  const auto profiles = bundle.SliceProfiles(f.slice);
  const auto sweep = EtaSweep(expected, profiles, etas, job.max_power);
  const auto front = ParetoFront(GridPoints(expected, profiles));

  const std::vector<std::string> header = {"kind",    "eta",           "beta",   "batch_size",
                                           "power_limit_w", "tta_s",   "eta_j",  "cost_j",
                                           "pareto",  "total_cost_j",  "ratio_vs_beta2"};
  std::vector<std::vector<Cell>> rows;
  json eta_rows = json::array(), front_rows = json::array(), beta_rows = json::array();
  for (const auto& r : sweep) {
    rows.push_back({"eta", FormatDouble(r.eta), std::nullopt,
                    std::to_string(r.config.batch_size), FormatDouble(r.config.power_limit),
                    FormatDouble(r.tta), FormatDouble(r.eta_energy), FormatDouble(r.cost),
                    r.on_front ? "true" : "false", std::nullopt, std::nullopt});
    eta_rows.push_back({{"eta", r.eta},
                        {"batch_size", r.config.batch_size},
                        {"power_limit_w", r.config.power_limit},
                        {"tta_s", r.tta},
                        {"eta_j", r.eta_energy},
                        {"cost_j", r.cost},
                        {"pareto", r.on_front}});
  }
  for (const auto& p : front) {
    rows.push_back({"front", std::nullopt, std::nullopt, std::to_string(p.config.batch_size),
                    FormatDouble(p.config.power_limit), FormatDouble(p.tta),
                    FormatDouble(p.eta_energy), std::nullopt, "true", std::nullopt,
                    std::nullopt});
    front_rows.push_back({{"batch_size", p.config.batch_size},
                          {"power_limit_w", p.config.power_limit},
                          {"tta_s", p.tta},
                          {"eta_j", p.eta_energy}});
  }
  if (!betas.empty()) {
    auto mean_total = [&](double beta) {
      double sum = 0.0;
      for (int k = 0; k < f.seeds; ++k) {
        JobSpec j = job;
        j.beta = beta;
        j.rng_seed = job.rng_seed + static_cast<std::uint64_t>(k);
        sum += RunExperiment(j, bundle, PolicyKind::kZeus).TotalCost();
      }
      return sum / f.seeds;
    };
    const double reference = mean_total(2.0);
    for (double beta : betas) {
      const double total = beta == 2.0 ? reference : mean_total(beta);
      rows.push_back({"beta", std::nullopt, FormatDouble(beta), std::nullopt, std::nullopt,
                      std::nullopt, std::nullopt, std::nullopt, std::nullopt,
                      FormatDouble(total), FormatDouble(total / reference)});
      beta_rows.push_back(
          {{"beta", beta}, {"total_cost_j", total}, {"ratio_vs_beta2", total / reference}});
    }
  }

  json params = JobParams(job);
  params["eta_grid"] = etas;
  params["beta_grid"] = betas;
  params["seeds"] = f.seeds;
  params["slice"] = f.slice;
  const std::string path = ResolveOut(f.out, "sweep." + f.format);
  RunManifest manifest{"sweep", params, BundleHash(bundle), {path}};
  std::string text;
  if (format == Format::kJson) {
    text = json{{"manifest", manifest.ToJson()},
                {"eta", eta_rows},
                {"front", front_rows},
                {"beta", beta_rows}}
               .dump(2) +
           "\n";
  } else {
    text = "# manifest: " + manifest.ToJson().dump() + "\n" + CsvTable(header, rows);
  }
  Emit(path, text, out);
  return kOk;
}

// ---- regret ------------------------------------------------------------------

struct RegretFlags {
  std::vector<std::string> results;
  std::string format = "csv";
  std::string out;
};

int CmdRegret(const RegretFlags& f, std::ostream& out) {
  const Format format = ParseFormat(f.format);
  if (f.results.size() != 2) throw UsageError("regret needs exactly two --results files");
  const ResultsView a = ParseResults(ReadFile(f.results[0]), f.results[0]);
  const ResultsView b = ParseResults(ReadFile(f.results[1]), f.results[1]);
  if (a.manifest.bundle_hash != b.manifest.bundle_hash) {
    throw MismatchError("results come from different bundles");
  }
  if (a.manifest.params.value("eta", json()) != b.manifest.params.value("eta", json())) {
    throw MismatchError("results use different eta");
  }
  if (a.cumulative_regret.size() != b.cumulative_regret.size()) {
    throw MismatchError("results cover different numbers of recurrences");
  }

  const std::size_t n = a.cumulative_regret.size();
  const double final_a = n ? a.cumulative_regret.back() : 0.0;
  const double final_b = n ? b.cumulative_regret.back() : 0.0;
  // B over A; equal totals (including 0/0) compare as 1.
  const double ratio = final_a == final_b ? 1.0
                       : final_a == 0.0   ? std::numeric_limits<double>::infinity()
                                          : final_b / final_a;

  json params = {{"results", f.results}, {"eta", a.manifest.params.value("eta", json())}};
  const std::string path = ResolveOut(f.out, "regret." + f.format);
  RunManifest manifest{"regret", params, a.manifest.bundle_hash, {path}};
  std::string text;
  if (format == Format::kJson) {
    json rows = json::array();
    for (std::size_t i = 0; i < n; ++i) {
      rows.push_back({{"recurrence", i},
                      {"cumulative_regret_a_j", a.cumulative_regret[i]},
                      {"cumulative_regret_b_j", b.cumulative_regret[i]},
                      {"difference_j", b.cumulative_regret[i] - a.cumulative_regret[i]}});
    }
    text = json{{"manifest", manifest.ToJson()},
                {"summary",
                 {{"final_regret_a_j", final_a},
                  {"final_regret_b_j", final_b},
                  {"final_ratio_b_over_a", std::isinf(ratio) ? json("inf") : json(ratio)}}},
                {"series", rows}}
               .dump(2) +
           "\n";
  } else {
    std::vector<std::vector<Cell>> rows;
    for (std::size_t i = 0; i < n; ++i) {
      rows.push_back({std::to_string(i), FormatDouble(a.cumulative_regret[i]),
                      FormatDouble(b.cumulative_regret[i]),
                      FormatDouble(b.cumulative_regret[i] - a.cumulative_regret[i])});
    }
    text = "# manifest: " + manifest.ToJson().dump() + "\n" +
           "# summary: " +
           json{{"final_regret_a_j", final_a},
                {"final_regret_b_j", final_b},
                {"final_ratio_b_over_a", std::isinf(ratio) ? json("inf") : json(ratio)}}
               .dump() +
           "\n" +
           CsvTable({"recurrence", "cumulative_regret_a_j", "cumulative_regret_b_j",
                     "difference_j"},
                    rows);
  }
  Emit(path, text, out);
  return kOk;
}

void AddRunFlags(CLI::App* cmd, RunFlags& f) {
  cmd->add_option("--trace", f.trace, "Trace bundle directory or manifest")->required();
  cmd->add_option("--eta", f.eta, "Energy weight in [0,1]")->capture_default_str();
  cmd->add_option("--beta", f.beta, "Early-stop multiplier (> 1)")->capture_default_str();
  cmd->add_option("--recurrences", f.recurrences, "Recurrence count or 'auto' (2|B||P|)")
      ->capture_default_str();
  cmd->add_option("--window", f.window, "Bandit window size or 'inf'")->capture_default_str();
  cmd->add_option("--seed", f.seed, "RNG seed")->capture_default_str();
}

}  // namespace

int Run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Trace-driven simulator for energy-time optimization of recurring training jobs",
               "recurtune"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);

  GenFlags gen;
  auto* gen_cmd = app.add_subcommand("gen", "Generate a synthetic trace bundle");
  gen_cmd->add_option("--preset", gen.preset, "Parameter preset")->capture_default_str();
  gen_cmd->add_option("--seed", gen.seed, "RNG seed")->capture_default_str();
  gen_cmd->add_option("--out", gen.out, "Output directory");
  gen_cmd->add_option("--noise", gen.noise, "Relative epoch noise");
  gen_cmd->add_option("--replicas", gen.replicas, "Seed replicas per batch size");
  gen_cmd->add_option("--slices", gen.slices, "Number of drift slices");
  gen_cmd->add_option("--drift", gen.drift, "Change point SLICE:BATCH_SIZE (repeatable)");
  gen_cmd->add_option("--max-epochs", gen.max_epochs, "Epoch cap per run");

  SimulateFlags sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Replay a policy over a trace bundle");
  AddRunFlags(sim_cmd, sim.run);
  sim_cmd->add_option("--policy", sim.policy, "zeus, grid or default")->capture_default_str();
  sim_cmd->add_option("--schedule", sim.schedule, "Arrival schedule CSV");
  sim_cmd->add_option("--slice-map", sim.slice_map,
                      "'even' or START:SLICE,... (default: even when sliced)");
  sim_cmd->add_option("--format", sim.format, "csv or json")->capture_default_str();
  sim_cmd->add_option("--out", sim.out, "Results file ('-' for stdout)");
  sim_cmd->add_option("--log", sim.log, "Experiment log file");

  SweepFlags sweep;
  auto* sweep_cmd = app.add_subcommand("sweep", "Eta and beta sweeps with the Pareto front");
  AddRunFlags(sweep_cmd, sweep.run);
  sweep_cmd->add_option("--eta-grid", sweep.eta_grid, "Comma-separated eta values")
      ->capture_default_str();
  sweep_cmd->add_option("--beta-grid", sweep.beta_grid, "Comma-separated beta values");
  sweep_cmd->add_option("--seeds", sweep.seeds, "Seeds averaged per beta")->capture_default_str();
  sweep_cmd->add_option("--slice", sweep.slice, "Trace slice for the oracle")
      ->capture_default_str();
  sweep_cmd->add_option("--format", sweep.format, "csv or json")->capture_default_str();
  sweep_cmd->add_option("--out", sweep.out, "Output file ('-' for stdout)");

  RegretFlags regret;
  auto* regret_cmd = app.add_subcommand("regret", "Compare cumulative regret of two results");
  regret_cmd->add_option("--results", regret.results, "Results file (give twice: A then B)")
      ->required();
  regret_cmd->add_option("--format", regret.format, "csv or json")->capture_default_str();
  regret_cmd->add_option("--out", regret.out, "Output file ('-' for stdout)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (gen_cmd->parsed()) return CmdGen(gen, out);
    if (sim_cmd->parsed()) return CmdSimulate(sim, out);
    if (sweep_cmd->parsed()) return CmdSweep(sweep, out);
    if (regret_cmd->parsed()) return CmdRegret(regret, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const MismatchError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const ValidationError& e) {
    err << "error: invalid input:\n";
    for (const auto& p : e.problems()) err << "  " << p << "\n";
    return kInvalidInput;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kInvalidInput;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kIoFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kInvalidInput;
  }
  return kUsage;
}

}  // namespace recurtune::cli
