#include "qaoalab/persistence.hpp"

#include "qaoalab/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>

namespace qaoalab {

namespace {

using nlohmann::json;

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

template <typename T>
T field(const json& j, const char* name) {
  if (!j.contains(name)) throw ConfigError(std::string("record is missing '") + name + "'");
  try {
    return j.at(name).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("record field '") + name + "' has the wrong type");
  }
}

std::optional<double> optional_field(const json& j, const char* name) {
  if (!j.contains(name) || j.at(name).is_null()) return std::nullopt;
  if (!j.at(name).is_number()) throw ConfigError(std::string("record field '") + name + "' must be a number");
  return j.at(name).get<double>();
}

std::string csv_optional(const std::optional<double>& v) { return v ? format_double(*v) : ""; }

/// Viridis-like ramp sampled at five stops.
std::string colour(double t) {
  static const double stops[5][3] = {
      {68, 1, 84}, {59, 82, 139}, {33, 145, 140}, {94, 201, 98}, {253, 231, 37}};
  t = std::clamp(t, 0.0, 1.0) * 4.0;
  const int k = std::min(static_cast<int>(t), 3);
  const double f = t - k;
  char buf[8];
  int rgb[3];
  for (int c = 0; c < 3; ++c) rgb[c] = static_cast<int>(std::lround(stops[k][c] + f * (stops[k + 1][c] - stops[k][c])));
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", rgb[0], rgb[1], rgb[2]);
  return buf;
}

}  // namespace

std::string format_double(double value) {
  char buf[32];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc()) return "nan";
  return std::string(buf, end);
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

json to_json(const SweepRecord& r) {
  json j;
  j["family"] = r.family;
  j["N"] = r.n_spins;
  j["p"] = r.p;
  j["hx"] = r.hx;
  j["hz"] = r.hz;
  j["row"] = r.row;
  j["col"] = r.col;
  j["protocol"] = r.protocol;
  j["initial"] = r.initial;
  j["cost_kind"] = r.cost_kind;
  j["stage"] = r.stage;
  j["best_cost"] = r.best_cost;
  j["schedule"] = r.schedule;
  j["infidelity"] = optional_number(r.infidelity);
  j["relative_energy"] = optional_number(r.relative_energy);
  j["snapped_infidelity"] = optional_number(r.snapped_infidelity);
  j["df"] = r.df;
  j["df_exceeds_bound"] = r.df_exceeds_bound;
  j["vne"] = r.vne;
  j["e_min"] = r.e_min;
  j["e_max"] = r.e_max;
  j["degeneracy"] = r.degeneracy;
  j["seed"] = r.seed;
  j["evaluations"] = r.evaluations;
  j["wall_seconds"] = r.wall_seconds;
  j["error"] = r.error ? json(*r.error) : json(nullptr);
  return j;
}

SweepRecord record_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("record must be a JSON object");
  SweepRecord r;
  r.family = field<std::string>(j, "family");
  r.n_spins = field<int>(j, "N");
  r.p = field<int>(j, "p");
  r.hx = field<double>(j, "hx");
  r.hz = field<double>(j, "hz");
  r.row = field<int>(j, "row");
  r.col = field<int>(j, "col");
  r.protocol = field<std::string>(j, "protocol");
  r.initial = field<std::string>(j, "initial");
  r.cost_kind = field<std::string>(j, "cost_kind");
  r.stage = field<std::string>(j, "stage");
  r.schedule = field<std::vector<std::vector<double>>>(j, "schedule");
  r.infidelity = optional_field(j, "infidelity");
  r.relative_energy = optional_field(j, "relative_energy");
  r.snapped_infidelity = optional_field(j, "snapped_infidelity");
  r.df_exceeds_bound = field<bool>(j, "df_exceeds_bound");
  r.degeneracy = field<int>(j, "degeneracy");
  r.seed = field<std::uint64_t>(j, "seed");
  r.evaluations = field<long>(j, "evaluations");
  r.wall_seconds = field<double>(j, "wall_seconds");
  if (j.contains("error") && !j.at("error").is_null()) r.error = field<std::string>(j, "error");
  // Failed points carry placeholder numbers.
  r.best_cost = field<double>(j, "best_cost");
  r.df = field<double>(j, "df");
  r.vne = field<double>(j, "vne");
  r.e_min = field<double>(j, "e_min");
  r.e_max = field<double>(j, "e_max");
  if (r.ok()) {
    if (r.p < 1 || r.schedule.size() != static_cast<std::size_t>(r.p)) {
      throw ConfigError("record schedule does not have p rows");
    }
    if (r.cost_kind != "relent" && !(r.best_cost >= 0.0 && r.best_cost <= 1.0)) {
      throw ConfigError("record best_cost outside [0, 1]");
    }
    if (!(r.df >= 0.0 && r.df <= 1.0)) throw ConfigError("record df outside [0, 1]");
  }
  return r;
}

RecordLedger::RecordLedger(std::filesystem::path path) : path_(std::move(path)) {
  std::error_code ec;
  if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path(), ec);
  out_.open(path_, std::ios::app);
  if (!out_) throw IoError("cannot open ledger " + path_.string());
}

void RecordLedger::append(const SweepRecord& record) {
  const std::string line = to_json(record).dump();
  std::lock_guard lock(mutex_);
  out_ << line << '\n';
  out_.flush();
  if (!out_) throw IoError("failed writing ledger " + path_.string());
}

std::vector<SweepRecord> read_records(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) lines.push_back(line);
  }
  // getline cannot tell whether the last line had its newline; re-check the file end.
  in.clear();
  in.seekg(-1, std::ios::end);
  char last = '\n';
  if (in) in.get(last);
  const bool truncated_tail = !lines.empty() && last != '\n';

  std::vector<SweepRecord> records;
  for (std::size_t k = 0; k < lines.size(); ++k) {
    json j;
    try {
      j = json::parse(lines[k]);
    } catch (const json::parse_error&) {
      if (truncated_tail && k + 1 == lines.size()) break;
      throw ConfigError(path.string() + ":" + std::to_string(k + 1) + ": malformed record");
    }
    try {
      records.push_back(record_from_json(j));
    } catch (const ConfigError& e) {
      throw ConfigError(path.string() + ":" + std::to_string(k + 1) + ": " + e.what());
    }
  }
  return records;
}

void write_summary_csv(const std::vector<SweepRecord>& records, const std::filesystem::path& path) {
  auto out = open_output(path);
  out << "family,N,p,row,col,hx,hz,stage,cost_kind,best_cost,infidelity,relative_energy,snapped_infidelity,"
         "df,vne,e_min,e_max,degeneracy,error\n";
  for (const auto& r : records) {
    out << r.family << ',' << r.n_spins << ',' << r.p << ',' << r.row << ',' << r.col << ',' << format_double(r.hx)
        << ',' << format_double(r.hz) << ',' << r.stage << ',' << r.cost_kind << ',';
    if (r.ok()) {
      out << format_double(r.best_cost) << ',' << csv_optional(r.infidelity) << ','
          << csv_optional(r.relative_energy) << ',' << csv_optional(r.snapped_infidelity) << ','
          << format_double(r.df) << ',' << format_double(r.vne) << ',' << format_double(r.e_min) << ','
          << format_double(r.e_max) << ',' << r.degeneracy << ',';
    } else {
      std::string message = *r.error;
      std::replace(message.begin(), message.end(), '"', '\'');
      out << ",,,,,,,,,\"" << message << '"';
    }
    out << '\n';
  }
  if (!out) throw IoError("failed writing " + path.string());
}

void write_heatmap_svg(const HeatmapData& data, const std::filesystem::path& path) {
  const std::size_t rows = data.hz.size();
  const std::size_t cols = data.hx.size();
  if (rows == 0 || cols == 0 || data.values.size() != rows * cols) {
    throw ConfigError("heatmap data does not match its axes");
  }
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& v : data.values) {
    if (!v || !std::isfinite(*v)) continue;
    const double l = std::log10(std::max(*v, kLogFloor));
    lo = std::min(lo, l);
    hi = std::max(hi, l);
  }
  if (!std::isfinite(lo)) lo = hi = 0.0;
  if (hi - lo < 1e-9) hi = lo + 1.0;

  const double cell = std::max(8.0, 320.0 / static_cast<double>(std::max(rows, cols)));
  const double left = 60, top = 40, bar = 20;
  const double width = left + cell * static_cast<double>(cols) + 90;
  const double height = top + cell * static_cast<double>(rows) + 50;
  auto out = open_output(path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  out << "<text x=\"" << left << "\" y=\"20\" font-size=\"13\">" << data.title << "</text>\n";
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const auto& v = data.values[r * cols + c];
      const double x = left + cell * static_cast<double>(c);
      // hz grows upward
      const double y = top + cell * static_cast<double>(rows - 1 - r);
      const std::string fill =
          (v && std::isfinite(*v)) ? colour((std::log10(std::max(*v, kLogFloor)) - lo) / (hi - lo)) : "#cccccc";
      out << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << cell << "\" height=\"" << cell << "\" fill=\""
          << fill << "\"><title>hx=" << format_double(data.hx[c]) << " hz=" << format_double(data.hz[r]) << " value="
          << (v ? format_double(*v) : std::string("n/a")) << "</title></rect>\n";
    }
  }
  // Map (hx, hz) onto cell centres by linear interpolation of the axis values.
  auto axis_pos = [](const std::vector<double>& axis, double v) {
    if (axis.size() == 1) return 0.5;
    const double t = (v - axis.front()) / (axis.back() - axis.front());
    return 0.5 + t * static_cast<double>(axis.size() - 1);
  };
  if (!data.overlay.empty()) {
    out << "<polyline fill=\"none\" stroke=\"red\" stroke-width=\"2\" points=\"";
    for (const auto& [hx, hz] : data.overlay) {
      out << left + cell * axis_pos(data.hx, hx) << ","
          << top + cell * (static_cast<double>(rows) - axis_pos(data.hz, hz)) << " ";
    }
    out << "\"/>\n";
    for (const auto& [hx, hz] : data.overlay) {
      out << "<circle r=\"3\" fill=\"red\" cx=\"" << left + cell * axis_pos(data.hx, hx) << "\" cy=\""
          << top + cell * (static_cast<double>(rows) - axis_pos(data.hz, hz)) << "\"/>\n";
    }
  }
  const double base = top + cell * static_cast<double>(rows);
  out << "<text x=\"" << left << "\" y=\"" << base + 15 << "\">hx " << format_double(data.hx.front()) << "</text>\n";
  out << "<text x=\"" << left + cell * static_cast<double>(cols) << "\" y=\"" << base + 15
      << "\" text-anchor=\"end\">" << format_double(data.hx.back()) << "</text>\n";
  out << "<text x=\"" << left - 5 << "\" y=\"" << base << "\" text-anchor=\"end\">hz " << format_double(data.hz.front())
      << "</text>\n";
  out << "<text x=\"" << left - 5 << "\" y=\"" << top + 10 << "\" text-anchor=\"end\">"
      << format_double(data.hz.back()) << "</text>\n";
  const double bx = left + cell * static_cast<double>(cols) + 20;
  const double bh = cell * static_cast<double>(rows);
  for (int k = 0; k < 50; ++k) {
    out << "<rect x=\"" << bx << "\" y=\"" << top + bh * (49 - k) / 50.0 << "\" width=\"" << bar << "\" height=\""
        << bh / 50.0 + 0.5 << "\" fill=\"" << colour(k / 49.0) << "\"/>\n";
  }
  out << "<text x=\"" << bx + bar + 4 << "\" y=\"" << top + 10 << "\">1e" << format_double(std::round(hi * 10) / 10)
      << "</text>\n";
  out << "<text x=\"" << bx + bar + 4 << "\" y=\"" << top + bh << "\">1e" << format_double(std::round(lo * 10) / 10)
      << "</text>\n";
  out << "</svg>\n";
  if (!out) throw IoError("failed writing " + path.string());
}

void write_sweep_heatmaps(const SweepOutput& output, Family family, const std::filesystem::path& directory) {
  const auto overlay = critical_overlay(family);
  auto grid = [&](int p, auto value) {
    std::vector<std::optional<double>> values(output.shape.size());
    for (const auto& r : output.records) {
      if (r.p != p || !r.ok()) continue;
      values[static_cast<std::size_t>(r.row) * static_cast<std::size_t>(output.shape.cols) +
             static_cast<std::size_t>(r.col)] = value(r);
    }
    return values;
  };
  int depth = 0;
  for (const auto& r : output.records) depth = std::max(depth, r.p);
  if (depth == 0) return;
  write_heatmap_svg({"D_F", output.hx_values, output.hz_values, grid(depth, [](const SweepRecord& r) { return r.df; }),
                     overlay},
                    directory / "heatmap_df.svg");
  write_heatmap_svg({"von Neumann entropy", output.hx_values, output.hz_values,
                     grid(depth, [](const SweepRecord& r) { return r.vne; }), overlay},
                    directory / "heatmap_vne.svg");
  for (int p = 1; p <= depth; ++p) {
    write_heatmap_svg({"best cost, p=" + std::to_string(p), output.hx_values, output.hz_values,
                       grid(p, [](const SweepRecord& r) { return r.best_cost; }), overlay},
                      directory / ("heatmap_cost_p" + std::to_string(p) + ".svg"));
  }
}

void write_histogram_csv(const Histogram& histogram, const std::filesystem::path& path) {
  auto out = open_output(path);
  out << "bin_lo,bin_hi,count\n";
  for (std::size_t k = 0; k < histogram.counts.size(); ++k) {
    out << format_double(histogram.lo + histogram.bin_width() * static_cast<double>(k)) << ','
        << format_double(histogram.lo + histogram.bin_width() * static_cast<double>(k + 1)) << ','
        << histogram.counts[k] << '\n';
  }
  if (!out) throw IoError("failed writing " + path.string());
}

void write_landscape_csv(const std::vector<LandscapeRow>& rows, const std::filesystem::path& path) {
  auto out = open_output(path);
  out << "hx,hz,constraint,T,epsilon,total_time,angles\n";
  for (const auto& r : rows) {
    out << format_double(r.hx) << ',' << format_double(r.hz) << ',' << to_string(r.mode) << ','
        << format_double(r.budget) << ',' << format_double(r.epsilon) << ',' << format_double(r.total_time) << ',';
    for (std::size_t k = 0; k < r.angles.size(); ++k) out << (k ? " " : "") << format_double(r.angles[k]);
    out << '\n';
  }
  if (!out) throw IoError("failed writing " + path.string());
}

void write_samples_csv(const std::vector<double>& samples, const std::filesystem::path& path) {
  auto out = open_output(path);
  out << "sample,epsilon\n";
  for (std::size_t k = 0; k < samples.size(); ++k) out << k << ',' << format_double(samples[k]) << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace qaoalab
