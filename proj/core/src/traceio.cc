#include "recurtune/traceio.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <tuple>

#include "recurtune/errors.h"

namespace recurtune {
namespace {

constexpr std::string_view kPowerHeader =
    "job_id,batch_size,power_limit_w,avg_power_w,throughput_epochs_per_s,slice";
constexpr std::string_view kPowerHeaderNoSlice =
    "job_id,batch_size,power_limit_w,avg_power_w,throughput_epochs_per_s";
constexpr std::string_view kTrainingHeader =
    "job_id,batch_size,seed,slice,epochs_to_target,converged";
constexpr std::string_view kGroundTruthHeader =
    "batch_size,slice,expected_epochs";

std::string Key(int b, double p, int slice) {
  return "(b=" + std::to_string(b) + ", p=" + FormatDouble(p) +
         ", slice=" + std::to_string(slice) + ")";
}

std::string_view Trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> Split(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    fields.push_back(Trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

// Iterates non-blank lines with their 1-based numbers.
template <typename Fn>
void ForEachLine(std::string_view text, Fn&& fn) {
  std::size_t number = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = text.find('\n', start);
    const auto line = text.substr(start, end == std::string_view::npos
                                             ? std::string_view::npos
                                             : end - start);
    ++number;
    if (!Trim(line).empty()) fn(number, Trim(line));
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
}

class FieldReader {
 public:
  FieldReader(const std::string& file, std::size_t line) : file_(file), line_(line) {}

  int Int(std::string_view field, const char* name) const {
    int value = 0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc() || ptr != field.data() + field.size()) {
      Fail(std::string("invalid integer for ") + name + ": '" +
           std::string(field) + "'");
    }
    return value;
  }

  double Double(std::string_view field, const char* name) const {
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc() || ptr != field.data() + field.size() ||
        !std::isfinite(value)) {
      Fail(std::string("invalid number for ") + name + ": '" +
           std::string(field) + "'");
    }
    return value;
  }

  bool Bool(std::string_view field, const char* name) const {
    if (field == "true" || field == "1") return true;
    if (field == "false" || field == "0") return false;
    Fail(std::string("invalid boolean for ") + name + ": '" + std::string(field) + "'");
  }

  [[noreturn]] void Fail(const std::string& what) const {
    throw ParseError(file_, line_, what);
  }

 private:
  const std::string& file_;
  std::size_t line_;
};

void CheckJobId(std::string* job_id, std::string_view field,
                const FieldReader& reader) {
  if (field.empty()) reader.Fail("empty job_id");
  if (job_id == nullptr) return;
  if (job_id->empty()) {
    *job_id = std::string(field);
  } else if (*job_id != field) {
    reader.Fail("job_id '" + std::string(field) + "' differs from '" + *job_id + "'");
  }
}

template <typename T, typename Key>
void SortBy(std::vector<T>& rows, Key key) {
  std::stable_sort(rows.begin(), rows.end(),
                   [&](const T& a, const T& b) { return key(a) < key(b); });
}

}  // namespace

std::string FormatDouble(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

std::vector<std::string> ValidateBundle(const BundleMetadata& metadata,
                                        std::span<const PowerProfile> power,
                                        std::span<const TrainingRecord> training,
                                        std::span<const GroundTruthRow> ground_truth) {
  std::vector<std::string> problems;
  if (metadata.job_id.empty()) problems.emplace_back("empty job_id");
  if (metadata.job_id.find_first_of(",\n\r") != std::string::npos) {
    problems.emplace_back("job_id must not contain commas or newlines");
  }
  if (power.empty()) problems.emplace_back("bundle has no power profiles");
  if (training.empty()) problems.emplace_back("bundle has no training records");

  std::set<int> batch_sizes;
  std::set<double> limits;
  std::set<int> slices;
  std::set<std::tuple<int, double, int>> power_keys;
  for (const auto& p : power) {
    batch_sizes.insert(p.batch_size);
    limits.insert(p.power_limit);
    slices.insert(p.slice);
    const auto key = Key(p.batch_size, p.power_limit, p.slice);
    if (p.batch_size <= 0) problems.push_back("non-positive batch size at " + key);
    if (!(p.power_limit > 0.0)) problems.push_back("non-positive power limit at " + key);
    if (!(p.avg_power > 0.0)) problems.push_back("non-positive average power at " + key);
    if (!(p.throughput > 0.0)) problems.push_back("non-positive throughput at " + key);
    if (p.slice < 0) problems.push_back("negative slice at " + key);
    if (metadata.max_power > 0.0 && p.avg_power > metadata.max_power) {
      problems.push_back("average power above max power at " + key);
    }
    if (!power_keys.emplace(p.batch_size, p.power_limit, p.slice).second) {
      problems.push_back("duplicate power profile " + key);
    }
  }
  std::set<std::tuple<int, int, int>> training_keys;
  std::set<std::pair<int, int>> trained;  // (b, slice)
  for (const auto& r : training) {
    batch_sizes.insert(r.batch_size);
    slices.insert(r.slice_index);
    const auto key = "(b=" + std::to_string(r.batch_size) +
                     ", seed=" + std::to_string(r.seed_index) +
                     ", slice=" + std::to_string(r.slice_index) + ")";
    if (r.batch_size <= 0) problems.push_back("non-positive batch size at " + key);
    if (r.slice_index < 0) problems.push_back("negative slice at " + key);
    if (r.epochs_to_target && *r.epochs_to_target <= 0) {
      problems.push_back("non-positive epochs_to_target at " + key);
    }
    if (r.epochs_to_target && metadata.max_epochs > 0 &&
        *r.epochs_to_target > metadata.max_epochs) {
      problems.push_back("epochs_to_target above max_epochs at " + key);
    }
    if (!training_keys.emplace(r.batch_size, r.seed_index, r.slice_index).second) {
      problems.push_back("duplicate training record " + key);
    }
    trained.emplace(r.batch_size, r.slice_index);
  }
  for (int s : slices) {
    for (int b : batch_sizes) {
      for (double p : limits) {
        if (!power_keys.contains({b, p, s})) {
          problems.push_back("missing power profile " + Key(b, p, s));
        }
      }
      if (!trained.contains({b, s})) {
        problems.push_back("missing training records (b=" + std::to_string(b) +
                           ", slice=" + std::to_string(s) + ")");
      }
    }
  }
  if (!batch_sizes.empty() && !batch_sizes.contains(metadata.default_batch_size)) {
    problems.emplace_back("default batch size not in the bundle's batch sizes");
  }
  if (!(metadata.max_power > 0.0)) {
    problems.emplace_back("max power must be positive");
  } else if (!limits.empty() && metadata.max_power < *limits.rbegin()) {
    problems.emplace_back("max power below the largest power limit");
  }
  if (metadata.max_epochs <= 0) problems.emplace_back("max epochs must be positive");
  std::set<std::pair<int, int>> truth_keys;
  for (const auto& g : ground_truth) {
    const auto key = "(b=" + std::to_string(g.batch_size) +
                     ", slice=" + std::to_string(g.slice) + ")";
    if (!batch_sizes.contains(g.batch_size) || !slices.contains(g.slice)) {
      problems.push_back("ground truth for unknown key " + key);
    }
    if (!truth_keys.emplace(g.batch_size, g.slice).second) {
      problems.push_back("duplicate ground truth " + key);
    }
  }
  return problems;
}

TraceBundle TraceBundle::Create(BundleMetadata metadata,
                                std::vector<PowerProfile> power,
                                std::vector<TrainingRecord> training,
                                std::vector<GroundTruthRow> ground_truth) {
  auto problems = ValidateBundle(metadata, power, training, ground_truth);
  if (!problems.empty()) throw ValidationError(std::move(problems));

  TraceBundle bundle;
  SortBy(power, [](const PowerProfile& p) {
    return std::tuple(p.slice, p.batch_size, p.power_limit);
  });
  SortBy(training, [](const TrainingRecord& r) {
    return std::tuple(r.slice_index, r.batch_size, r.seed_index);
  });
  SortBy(ground_truth, [](const GroundTruthRow& g) {
    return std::tuple(g.slice, g.batch_size);
  });
  bundle.metadata_ = std::move(metadata);
  bundle.power_ = std::move(power);
  bundle.training_ = std::move(training);
  bundle.ground_truth_ = std::move(ground_truth);

  std::set<int> bs, ss;
  std::set<double> ps;
  for (std::size_t i = 0; i < bundle.power_.size(); ++i) {
    const auto& p = bundle.power_[i];
    bs.insert(p.batch_size);
    ps.insert(p.power_limit);
    ss.insert(p.slice);
    auto& range = bundle.power_index_.try_emplace({p.slice, p.batch_size}, i, i).first->second;
    range.second = i + 1;
    auto& srange = bundle.power_slices_.try_emplace(p.slice, i, i).first->second;
    srange.second = i + 1;
  }
  for (std::size_t i = 0; i < bundle.training_.size(); ++i) {
    const auto& r = bundle.training_[i];
    auto& range =
        bundle.training_index_.try_emplace({r.slice_index, r.batch_size}, i, i).first->second;
    range.second = i + 1;
    auto& srange = bundle.training_slices_.try_emplace(r.slice_index, i, i).first->second;
    srange.second = i + 1;
  }
  bundle.batch_sizes_.assign(bs.begin(), bs.end());
  bundle.power_limits_.assign(ps.begin(), ps.end());
  bundle.slices_.assign(ss.begin(), ss.end());
  return bundle;
}

std::span<const PowerProfile> TraceBundle::Profiles(int batch_size, int slice) const {
  auto it = power_index_.find({slice, batch_size});
  if (it == power_index_.end()) return {};
  return std::span(power_).subspan(it->second.first, it->second.second - it->second.first);
}

std::span<const PowerProfile> TraceBundle::SliceProfiles(int slice) const {
  auto it = power_slices_.find(slice);
  if (it == power_slices_.end()) return {};
  return std::span(power_).subspan(it->second.first, it->second.second - it->second.first);
}

std::span<const TrainingRecord> TraceBundle::Records(int batch_size, int slice) const {
  auto it = training_index_.find({slice, batch_size});
  if (it == training_index_.end()) return {};
  return std::span(training_).subspan(it->second.first,
                                      it->second.second - it->second.first);
}

std::span<const TrainingRecord> TraceBundle::SliceRecords(int slice) const {
  auto it = training_slices_.find(slice);
  if (it == training_slices_.end()) return {};
  return std::span(training_).subspan(it->second.first,
                                      it->second.second - it->second.first);
}

std::string FormatPowerCsv(const TraceBundle& bundle) {
  std::string out(kPowerHeader);
  out += '\n';
  const auto& job = bundle.metadata().job_id;
  for (const auto& p : bundle.power()) {
    out += job + ',' + std::to_string(p.batch_size) + ',' + FormatDouble(p.power_limit) +
           ',' + FormatDouble(p.avg_power) + ',' + FormatDouble(p.throughput) + ',' +
           std::to_string(p.slice) + '\n';
  }
  return out;
}

std::string FormatTrainingCsv(const TraceBundle& bundle) {
  std::string out(kTrainingHeader);
  out += '\n';
  const auto& job = bundle.metadata().job_id;
  for (const auto& r : bundle.training()) {
    out += job + ',' + std::to_string(r.batch_size) + ',' + std::to_string(r.seed_index) +
           ',' + std::to_string(r.slice_index) + ',' +
           (r.epochs_to_target ? std::to_string(*r.epochs_to_target) : "") + ',' +
           (r.converged() ? "true" : "false") + '\n';
  }
  return out;
}

std::string FormatGroundTruthCsv(const TraceBundle& bundle) {
  std::string out(kGroundTruthHeader);
  out += '\n';
  for (const auto& g : bundle.ground_truth()) {
    out += std::to_string(g.batch_size) + ',' + std::to_string(g.slice) + ',' +
           (g.expected_epochs ? FormatDouble(*g.expected_epochs) : "") + '\n';
  }
  return out;
}

nlohmann::json ManifestJson(const TraceBundle& bundle) {
  const auto& m = bundle.metadata();
  nlohmann::json j;
  j["format"] = kBundleFormat;
  j["job_id"] = m.job_id;
  j["default_batch_size"] = m.default_batch_size;
  j["max_power_w"] = m.max_power;
  j["max_epochs"] = m.max_epochs;
  j["units"] = m.units;
  j["power_file"] = kPowerFile;
  j["training_file"] = kTrainingFile;
  if (!bundle.ground_truth().empty()) j["ground_truth_file"] = kGroundTruthFile;
  j["generator"] = m.generator;
  return j;
}

std::vector<PowerProfile> ParsePowerCsv(std::string_view text, const std::string& file,
                                        std::string* job_id) {
  std::vector<PowerProfile> rows;
  bool header_seen = false;
  std::size_t columns = 0;
  ForEachLine(text, [&](std::size_t number, std::string_view line) {
    FieldReader reader(file, number);
    if (!header_seen) {
      if (line == kPowerHeader) {
        columns = 6;
      } else if (line == kPowerHeaderNoSlice) {
        columns = 5;
      } else {
        reader.Fail("unexpected power header '" + std::string(line) + "'");
      }
      header_seen = true;
      return;
    }
    const auto f = Split(line);
    if (f.size() != columns) {
      reader.Fail("expected " + std::to_string(columns) + " fields, got " +
                  std::to_string(f.size()));
    }
    CheckJobId(job_id, f[0], reader);
    PowerProfile p;
    p.batch_size = reader.Int(f[1], "batch_size");
    p.power_limit = reader.Double(f[2], "power_limit_w");
    p.avg_power = reader.Double(f[3], "avg_power_w");
    p.throughput = reader.Double(f[4], "throughput_epochs_per_s");
    p.slice = columns == 6 ? reader.Int(f[5], "slice") : 0;
    rows.push_back(p);
  });
  if (!header_seen) throw ParseError(file, 0, "missing header");
  return rows;
}

std::vector<TrainingRecord> ParseTrainingCsv(std::string_view text,
                                             const std::string& file,
                                             std::string* job_id) {
  std::vector<TrainingRecord> rows;
  bool header_seen = false;
  ForEachLine(text, [&](std::size_t number, std::string_view line) {
    FieldReader reader(file, number);
    if (!header_seen) {
      if (line != kTrainingHeader) {
        reader.Fail("unexpected training header '" + std::string(line) + "'");
      }
      header_seen = true;
      return;
    }
    const auto f = Split(line);
    if (f.size() != 6) {
      reader.Fail("expected 6 fields, got " + std::to_string(f.size()));
    }
    CheckJobId(job_id, f[0], reader);
    TrainingRecord r;
    r.batch_size = reader.Int(f[1], "batch_size");
    r.seed_index = reader.Int(f[2], "seed");
    r.slice_index = reader.Int(f[3], "slice");
    if (!f[4].empty()) r.epochs_to_target = reader.Int(f[4], "epochs_to_target");
    const bool converged = reader.Bool(f[5], "converged");
    if (converged != r.converged()) {
      reader.Fail(converged ? "converged=true requires epochs_to_target"
                            : "converged=false requires empty epochs_to_target");
    }
    rows.push_back(r);
  });
  if (!header_seen) throw ParseError(file, 0, "missing header");
  return rows;
}

std::vector<GroundTruthRow> ParseGroundTruthCsv(std::string_view text,
                                                const std::string& file) {
  std::vector<GroundTruthRow> rows;
  bool header_seen = false;
  ForEachLine(text, [&](std::size_t number, std::string_view line) {
    FieldReader reader(file, number);
    if (!header_seen) {
      if (line != kGroundTruthHeader) {
        reader.Fail("unexpected ground truth header '" + std::string(line) + "'");
      }
      header_seen = true;
      return;
    }
    const auto f = Split(line);
    if (f.size() != 3) reader.Fail("expected 3 fields, got " + std::to_string(f.size()));
    GroundTruthRow g;
    g.batch_size = reader.Int(f[0], "batch_size");
    g.slice = reader.Int(f[1], "slice");
    if (!f[2].empty()) g.expected_epochs = reader.Double(f[2], "expected_epochs");
    rows.push_back(g);
  });
  if (!header_seen) throw ParseError(file, 0, "missing header");
  return rows;
}

std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("error reading " + path.string());
  return ss.str();
}

void WriteFile(const std::filesystem::path& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw IoError("error writing " + path.string());
}

TraceBundle LoadBundle(const std::filesystem::path& path) {
  namespace fs = std::filesystem;
  const fs::path manifest_path =
      fs::is_directory(path) ? path / kManifestFile : path;
  const fs::path dir = manifest_path.parent_path();
  const std::string manifest_name = manifest_path.string();

  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(ReadFile(manifest_path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(manifest_name, 0, e.what());
  }
  BundleMetadata metadata;
  std::string power_file, training_file;
  std::optional<std::string> truth_file;
  try {
    if (manifest.value("format", "") != kBundleFormat) {
      throw ParseError(manifest_name, 0, "unsupported bundle format");
    }
    metadata.job_id = manifest.at("job_id").get<std::string>();
    metadata.default_batch_size = manifest.at("default_batch_size").get<int>();
    metadata.max_power = manifest.at("max_power_w").get<double>();
    metadata.max_epochs = manifest.at("max_epochs").get<int>();
    metadata.units = manifest.value("units", std::map<std::string, std::string>{});
    metadata.generator = manifest.value("generator", nlohmann::json());
    power_file = manifest.at("power_file").get<std::string>();
    training_file = manifest.at("training_file").get<std::string>();
    if (manifest.contains("ground_truth_file")) {
      truth_file = manifest.at("ground_truth_file").get<std::string>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(manifest_name, 0, std::string("bad manifest: ") + e.what());
  }

  std::string job_id = metadata.job_id;
  auto power = ParsePowerCsv(ReadFile(dir / power_file), (dir / power_file).string(), &job_id);
  auto training = ParseTrainingCsv(ReadFile(dir / training_file),
                                   (dir / training_file).string(), &job_id);
  std::vector<GroundTruthRow> truth;
  if (truth_file) {
    truth = ParseGroundTruthCsv(ReadFile(dir / *truth_file), (dir / *truth_file).string());
  }
  return TraceBundle::Create(std::move(metadata), std::move(power), std::move(training),
                             std::move(truth));
}

void WriteBundle(const TraceBundle& bundle, const std::filesystem::path& dir) {
  auto problems = ValidateBundle(bundle.metadata(), bundle.power(), bundle.training(),
                                 bundle.ground_truth());
  if (!problems.empty()) throw ValidationError(std::move(problems));
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  WriteFile(dir / kPowerFile, FormatPowerCsv(bundle));
  WriteFile(dir / kTrainingFile, FormatTrainingCsv(bundle));
  if (!bundle.ground_truth().empty()) {
    WriteFile(dir / kGroundTruthFile, FormatGroundTruthCsv(bundle));
  }
  WriteFile(dir / kManifestFile, ManifestJson(bundle).dump(2) + "\n");
}

}  // namespace recurtune
