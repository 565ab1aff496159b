#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "recurtune/sim.h"
#include "recurtune/traceio.h"

namespace recurtune::cli {

inline constexpr const char* kToolName = "recurtune";
inline constexpr const char* kToolVersion = "0.1.0";

// Hex SHA-256 of the bundle's canonical serialization, so reformatted but
// equal bundles hash alike.
std::string BundleHash(const TraceBundle& bundle);
std::string Sha256Hex(std::string_view data);

struct RunManifest {
  std::string command;
  nlohmann::json params;  // resolved, never defaults left implicit
  std::string bundle_hash;
  std::vector<std::string> outputs;

  nlohmann::json ToJson() const;
  static RunManifest FromJson(const nlohmann::json& j);
};

enum class Format { kCsv, kJson };

struct SimulateSummary {
  Config final_config;
  double total_cost = 0.0;
  double total_regret = 0.0;
  double last5_mean_cost = 0.0;
  double default_mean_cost = 0.0;
  double savings_vs_default = 0.0;  // 1 - last5 / default

  nlohmann::json ToJson() const;
};

SimulateSummary Summarize(const ExperimentResult& result,
                          const ExperimentResult& default_run);

std::string FormatResults(const RunManifest& manifest, const SimulateSummary& summary,
                          const ExperimentResult& result, Format format);

// What `regret` needs from a results file of either format.
struct ResultsView {
  RunManifest manifest;
  std::vector<double> cumulative_regret;
};

// Throws ParseError on malformed text.
ResultsView ParseResults(const std::string& text, const std::string& file);

// Renders rows of a table with a header; nullopt cells are left empty.
using Cell = std::optional<std::string>;
std::string CsvTable(const std::vector<std::string>& header,
                     const std::vector<std::vector<Cell>>& rows);

}  // namespace recurtune::cli
