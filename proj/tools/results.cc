#include "results.h"

#include <openssl/evp.h>

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "recurtune/errors.h"

namespace recurtune::cli {
namespace {

using nlohmann::json;

constexpr std::string_view kManifestPrefix = "# manifest: ";
constexpr std::string_view kSummaryPrefix = "# summary: ";

const std::vector<std::string> kResultColumns = {
    "recurrence",   "slice",         "phase",      "batch_size",   "power_limit_w",
    "energy_j",     "time_s",        "cost_j",     "epochs_run",   "converged",
    "early_stopped", "profiled",     "threshold_j", "regret_j",    "cumulative_regret_j"};

std::string Bool(bool b) { return b ? "true" : "false"; }

}  // namespace

std::string Sha256Hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 failed");
  }
  std::string hex;
  char buf[3];
  for (unsigned int i = 0; i < length; ++i) {
    std::snprintf(buf, sizeof(buf), "%02x", digest[i]);
    hex += buf;
  }
  return hex;
}

std::string BundleHash(const TraceBundle& bundle) {
  std::string canonical = ManifestJson(bundle).dump();
  canonical += '\n';
  canonical += FormatPowerCsv(bundle);
  canonical += FormatTrainingCsv(bundle);
  canonical += FormatGroundTruthCsv(bundle);
  return Sha256Hex(canonical);
}

json RunManifest::ToJson() const {
  return {{"tool", kToolName},       {"version", kToolVersion},
          {"command", command},      {"params", params},
          {"bundle_hash", bundle_hash}, {"outputs", outputs}};
}

RunManifest RunManifest::FromJson(const json& j) {
  RunManifest m;
  m.command = j.at("command").get<std::string>();
  m.params = j.at("params");
  m.bundle_hash = j.at("bundle_hash").get<std::string>();
  m.outputs = j.value("outputs", std::vector<std::string>{});
  return m;
}

json SimulateSummary::ToJson() const {
  return {{"final_batch_size", final_config.batch_size},
          {"final_power_limit_w", final_config.power_limit},
          {"total_cost_j", total_cost},
          {"total_regret_j", total_regret},
          {"last5_mean_cost_j", last5_mean_cost},
          {"default_mean_cost_j", default_mean_cost},
          {"savings_vs_default", savings_vs_default}};
}

SimulateSummary Summarize(const ExperimentResult& result, const ExperimentResult& default_run) {
  SimulateSummary s;
  if (!result.records.empty()) s.final_config = result.records.back().sample.config;
  s.total_cost = result.TotalCost();
  s.total_regret = result.TotalRegret();
  const std::size_t n = result.records.size();
  s.last5_mean_cost = result.MeanCostFrom(n > 5 ? n - 5 : 0);
  s.default_mean_cost = default_run.MeanCostFrom(0);
  s.savings_vs_default =
      s.default_mean_cost > 0.0 ? 1.0 - s.last5_mean_cost / s.default_mean_cost : 0.0;
  return s;
}

std::string CsvTable(const std::vector<std::string>& header,
                     const std::vector<std::vector<Cell>>& rows) {
  std::string out;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) out += ',';
    out += header[i];
  }
  out += '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      if (row[i]) out += *row[i];
    }
    out += '\n';
  }
  return out;
}

std::string FormatResults(const RunManifest& manifest, const SimulateSummary& summary,
                          const ExperimentResult& result, Format format) {
  if (format == Format::kJson) {
    json records = json::array();
    for (std::size_t i = 0; i < result.records.size(); ++i) {
      const auto& r = result.records[i];
      const auto& s = r.sample;
      records.push_back({{"recurrence", r.recurrence},
                         {"slice", r.slice},
                         {"phase", r.phase},
                         {"batch_size", s.config.batch_size},
                         {"power_limit_w", s.config.power_limit},
                         {"energy_j", s.energy},
                         {"time_s", s.time},
                         {"cost_j", s.cost},
                         {"epochs_run", s.epochs_run},
                         {"converged", s.converged},
                         {"early_stopped", s.early_stopped},
                         {"profiled", s.profiled},
                         {"threshold_j", r.threshold ? json(*r.threshold) : json()},
                         {"regret_j", r.regret},
                         {"cumulative_regret_j", result.cumulative_regret[i]}});
    }
    json doc = {{"manifest", manifest.ToJson()},
                {"summary", summary.ToJson()},
                {"records", records}};
    return doc.dump(2) + "\n";
  }
  std::vector<std::vector<Cell>> rows;
  for (std::size_t i = 0; i < result.records.size(); ++i) {
    const auto& r = result.records[i];
    const auto& s = r.sample;
    rows.push_back({std::to_string(r.recurrence), std::to_string(r.slice), r.phase,
                    std::to_string(s.config.batch_size), FormatDouble(s.config.power_limit),
                    FormatDouble(s.energy), FormatDouble(s.time), FormatDouble(s.cost),
                    std::to_string(s.epochs_run), Bool(s.converged), Bool(s.early_stopped),
                    Bool(s.profiled),
                    r.threshold ? Cell(FormatDouble(*r.threshold)) : std::nullopt,
                    FormatDouble(r.regret), FormatDouble(result.cumulative_regret[i])});
  }
  std::string out(kManifestPrefix);
  out += manifest.ToJson().dump() + "\n";
  out += std::string(kSummaryPrefix) + summary.ToJson().dump() + "\n";
  out += CsvTable(kResultColumns, rows);
  return out;
}

ResultsView ParseResults(const std::string& text, const std::string& file) {
  ResultsView view;
  const auto first = text.find_first_not_of(" \t\r\n");
  try {
    if (first != std::string::npos && text[first] == '{') {
      const json doc = json::parse(text);
      view.manifest = RunManifest::FromJson(doc.at("manifest"));
      for (const auto& r : doc.at("records")) {
        view.cumulative_regret.push_back(r.at("cumulative_regret_j").get<double>());
      }
      return view;
    }
  } catch (const json::exception& e) {
    throw ParseError(file, 0, e.what());
  }

  std::istringstream in(text);
  std::string line;
  std::size_t number = 0;
  bool have_manifest = false;
  std::optional<std::size_t> column;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.starts_with(kManifestPrefix)) {
      try {
        view.manifest = RunManifest::FromJson(json::parse(line.substr(kManifestPrefix.size())));
      } catch (const json::exception& e) {
        throw ParseError(file, number, e.what());
      }
      have_manifest = true;
      continue;
    }
    if (line.starts_with("#")) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (line.back() == ',') fields.emplace_back();
    if (!column) {
      auto it = std::find(fields.begin(), fields.end(), "cumulative_regret_j");
      if (it == fields.end()) throw ParseError(file, number, "no cumulative_regret_j column");
      column = static_cast<std::size_t>(it - fields.begin());
      continue;
    }
    if (*column >= fields.size()) throw ParseError(file, number, "short row");
    try {
      std::size_t used = 0;
      view.cumulative_regret.push_back(std::stod(fields[*column], &used));
      if (used != fields[*column].size()) throw std::invalid_argument("trailing text");
    } catch (const std::exception&) {
      throw ParseError(file, number, "invalid cumulative_regret_j '" + fields[*column] + "'");
    }
  }
  if (!have_manifest) throw ParseError(file, 0, "results file has no manifest");
  if (!column) throw ParseError(file, 0, "results file has no header");
  return view;
}

}  // namespace recurtune::cli
