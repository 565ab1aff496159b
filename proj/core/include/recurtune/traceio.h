#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "recurtune/domain.h"

namespace recurtune {

// Analytic expectation exported by the synthetic generator so tests can
// compare against ground truth instead of invented numbers.
struct GroundTruthRow {
  int batch_size = 0;
  int slice = 0;
  std::optional<double> expected_epochs;  // nullopt: never converges

  bool operator==(const GroundTruthRow&) const = default;
};

struct BundleMetadata {
  std::string job_id;
  int default_batch_size = 0;
  double max_power = 0.0;  // watts
  int max_epochs = 0;
  std::map<std::string, std::string> units;
  nlohmann::json generator;  // null unless synthetic

  bool operator==(const BundleMetadata&) const = default;
};

// Power and training traces for one job, complete over batch sizes x power
// limits x slices. Rows are kept in canonical (slice, batch size, power limit
// / seed) order. A default-constructed bundle is empty and invalid.
class TraceBundle {
 public:
  TraceBundle() = default;

  // Validates and indexes; throws ValidationError listing every problem.
  static TraceBundle Create(BundleMetadata metadata,
                            std::vector<PowerProfile> power,
                            std::vector<TrainingRecord> training,
                            std::vector<GroundTruthRow> ground_truth = {});

  bool empty() const { return power_.empty() && training_.empty(); }
  const BundleMetadata& metadata() const { return metadata_; }
  std::span<const PowerProfile> power() const { return power_; }
  std::span<const TrainingRecord> training() const { return training_; }
  std::span<const GroundTruthRow> ground_truth() const { return ground_truth_; }

  const std::vector<int>& batch_sizes() const { return batch_sizes_; }
  const std::vector<double>& power_limits() const { return power_limits_; }
  const std::vector<int>& slices() const { return slices_; }

  // Contiguous views; empty when the key is absent.
  std::span<const PowerProfile> Profiles(int batch_size, int slice) const;
  std::span<const PowerProfile> SliceProfiles(int slice) const;
  std::span<const TrainingRecord> Records(int batch_size, int slice) const;
  std::span<const TrainingRecord> SliceRecords(int slice) const;

  bool operator==(const TraceBundle& other) const {
    return metadata_ == other.metadata_ && power_ == other.power_ &&
           training_ == other.training_ && ground_truth_ == other.ground_truth_;
  }

 private:
  using Range = std::pair<std::size_t, std::size_t>;

  BundleMetadata metadata_;
  std::vector<PowerProfile> power_;
  std::vector<TrainingRecord> training_;
  std::vector<GroundTruthRow> ground_truth_;
  std::vector<int> batch_sizes_;
  std::vector<double> power_limits_;
  std::vector<int> slices_;
  std::map<std::pair<int, int>, Range> power_index_;     // (slice, b)
  std::map<std::pair<int, int>, Range> training_index_;  // (slice, b)
  std::map<int, Range> power_slices_;
  std::map<int, Range> training_slices_;
};

// Every violated bundle invariant; empty means valid.
std::vector<std::string> ValidateBundle(
    const BundleMetadata& metadata, std::span<const PowerProfile> power,
    std::span<const TrainingRecord> training,
    std::span<const GroundTruthRow> ground_truth = {});

inline constexpr std::string_view kManifestFile = "manifest.json";
inline constexpr std::string_view kPowerFile = "power.csv";
inline constexpr std::string_view kTrainingFile = "training.csv";
inline constexpr std::string_view kGroundTruthFile = "ground_truth.csv";
inline constexpr std::string_view kBundleFormat = "recurtune-trace-bundle/1";

// Canonical file contents. The writer emits exactly these strings.
std::string FormatPowerCsv(const TraceBundle& bundle);
std::string FormatTrainingCsv(const TraceBundle& bundle);
std::string FormatGroundTruthCsv(const TraceBundle& bundle);
nlohmann::json ManifestJson(const TraceBundle& bundle);

// Parsers; `file` names the source in ParseError messages.
std::vector<PowerProfile> ParsePowerCsv(std::string_view text,
                                        const std::string& file,
                                        std::string* job_id = nullptr);
std::vector<TrainingRecord> ParseTrainingCsv(std::string_view text,
                                             const std::string& file,
                                             std::string* job_id = nullptr);
std::vector<GroundTruthRow> ParseGroundTruthCsv(std::string_view text,
                                                const std::string& file);

// `path` is a bundle directory or its manifest file.
TraceBundle LoadBundle(const std::filesystem::path& path);

// Writes manifest, power, training and (if present) ground-truth files into
// `dir`, creating it. Refuses invalid bundles with ValidationError.
void WriteBundle(const TraceBundle& bundle, const std::filesystem::path& dir);

// Shortest text that parses back to the same double.
std::string FormatDouble(double value);

std::string ReadFile(const std::filesystem::path& path);
void WriteFile(const std::filesystem::path& path, std::string_view contents);

}  // namespace recurtune
