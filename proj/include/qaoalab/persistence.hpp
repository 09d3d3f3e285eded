#pragma once

#include "qaoalab/experiments.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace qaoalab {

nlohmann::json to_json(const SweepRecord& record);
/// Throws ConfigError naming the first missing or mistyped field.
SweepRecord record_from_json(const nlohmann::json& j);

/// Append-only JSON-lines file of sweep records; safe to share between workers.
class RecordLedger {
 public:
  explicit RecordLedger(std::filesystem::path path);
  void append(const SweepRecord& record);
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  std::mutex mutex_;
  std::ofstream out_;
};

/// Reads every record of a JSON-lines file. A truncated final line (interrupted
/// write) is ignored; any other malformed line throws ConfigError.
std::vector<SweepRecord> read_records(const std::filesystem::path& path);

/// One row per record: point, depth, costs, D_F, VNE, energies.
void write_summary_csv(const std::vector<SweepRecord>& records, const std::filesystem::path& path);

struct HeatmapData {
  std::string title;
  std::vector<double> hx;
  std::vector<double> hz;
  /// Row-major, rows follow hz; empty entries are drawn as missing.
  std::vector<std::optional<double>> values;
  std::vector<std::pair<double, double>> overlay;
};

/// Cells coloured by log10(max(value, 1e-12)).
void write_heatmap_svg(const HeatmapData& data, const std::filesystem::path& path);

/// One heatmap per depth for best cost, D_F and VNE, named heatmap_<quantity>[_p<p>].svg.
void write_sweep_heatmaps(const SweepOutput& output, Family family, const std::filesystem::path& directory);

void write_histogram_csv(const Histogram& histogram, const std::filesystem::path& path);
void write_landscape_csv(const std::vector<LandscapeRow>& rows, const std::filesystem::path& path);
void write_samples_csv(const std::vector<double>& samples, const std::filesystem::path& path);

/// Opens `path` for writing, creating parent directories; throws IoError on failure.
std::ofstream open_output(const std::filesystem::path& path);
/// Full round-trip precision text.
std::string format_double(double value);

}  // namespace qaoalab
