#include "qaoalab/config.hpp"

#include "qaoalab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace qaoalab {

namespace {

using nlohmann::json;

/// Reads one JSON object, remembering which keys were used so leftovers can be rejected.
class Block {
 public:
  Block(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where() + "must be an object");
  }

  bool has(const std::string& key) const { return j_.contains(key) && !j_.at(key).is_null(); }

  void mark(const std::string& key) { used_.insert(key); }

  const json& raw(const std::string& key) {
    used_.insert(key);
    return j_.at(key);
  }

  Block child(const std::string& key) {
    used_.insert(key);
    return Block(j_.at(key), name(key));
  }

  void number(const std::string& key, double& out) {
    used_.insert(key);
    if (!has(key)) return;
    if (!j_.at(key).is_number()) throw ConfigError(name(key) + ": must be a number");
    out = j_.at(key).get<double>();
    if (!std::isfinite(out)) throw ConfigError(name(key) + ": must be finite");
  }

  void integer(const std::string& key, int& out) {
    used_.insert(key);
    if (!has(key)) return;
    if (!j_.at(key).is_number_integer()) throw ConfigError(name(key) + ": must be an integer");
    out = j_.at(key).get<int>();
  }

  void integer(const std::string& key, std::optional<int>& out) {
    used_.insert(key);
    if (!has(key)) return;
    int v = 0;
    integer(key, v);
    out = v;
  }

  void text(const std::string& key, std::string& out) {
    used_.insert(key);
    if (!has(key)) return;
    if (!j_.at(key).is_string()) throw ConfigError(name(key) + ": must be a string");
    out = j_.at(key).get<std::string>();
  }

  void flag(const std::string& key, bool& out) {
    used_.insert(key);
    if (!has(key)) return;
    if (!j_.at(key).is_boolean()) throw ConfigError(name(key) + ": must be true or false");
    out = j_.at(key).get<bool>();
  }

  void numbers(const std::string& key, std::vector<double>& out) {
    used_.insert(key);
    if (!has(key)) return;
    const json& a = j_.at(key);
    if (!a.is_array()) throw ConfigError(name(key) + ": must be an array of numbers");
    out.clear();
    for (const auto& v : a) {
      if (!v.is_number() || !std::isfinite(v.get<double>())) throw ConfigError(name(key) + ": must be an array of numbers");
      out.push_back(v.get<double>());
    }
  }

  void points(const std::string& key, std::vector<std::pair<double, double>>& out) {
    used_.insert(key);
    if (!has(key)) return;
    const json& a = j_.at(key);
    if (!a.is_array()) throw ConfigError(name(key) + ": must be an array of [hx, hz] pairs");
    out.clear();
    for (const auto& v : a) {
      if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
        throw ConfigError(name(key) + ": must be an array of [hx, hz] pairs");
      }
      out.emplace_back(v[0].get<double>(), v[1].get<double>());
    }
  }

  template <typename Parse, typename T>
  void choice(const std::string& key, T& out, Parse parse) {
    std::string s;
    text(key, s);
    if (s.empty()) return;
    try {
      out = parse(s);
    } catch (const ConfigError& e) {
      throw ConfigError(name(key) + ": " + e.what());
    }
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!used_.count(it.key())) throw ConfigError("unknown key '" + name(it.key()) + "'");
    }
  }

 private:
  std::string name(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  std::string where() const { return path_.empty() ? "config " : path_ + ": "; }

  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

GridAxis parse_axis(Block b, GridAxis axis) {
  b.number("min", axis.lo);
  b.number("max", axis.hi);
  b.integer("count", axis.count);
  b.flag("include_min", axis.include_lo);
  b.flag("include_max", axis.include_hi);
  b.finish();
  return axis;
}

json axis_json(const GridAxis& a) {
  return {{"min", a.lo}, {"max", a.hi}, {"count", a.count}, {"include_min", a.include_lo}, {"include_max", a.include_hi}};
}

json points_json(const std::vector<std::pair<double, double>>& pts) {
  json a = json::array();
  for (const auto& [x, z] : pts) a.push_back({x, z});
  return a;
}

template <typename T>
json optional_json(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

}  // namespace

GridSpec RunConfig::grid() const {
  GridSpec g = GridSpec::defaults_for(family, grid_count);
  if (grid_hx) g.hx = *grid_hx;
  if (grid_hz) g.hz = *grid_hz;
  g.extra_hz = extra_hz;
  return g;
}

PointSetup RunConfig::point_setup() const {
  PointSetup s;
  s.family = family;
  s.n_spins = n_spins;
  s.protocol = protocol;
  if (initial != "auto") s.initial = parse_initial(initial, magnetization.value_or(-(n_spins / 3)));
  s.cost = cost;
  s.fidelity = fidelity;
  s.degenerate = degenerate;
  s.degeneracy_tolerance = degeneracy_tolerance;
  s.cut = cut;
  return s;
}

SweepConfig RunConfig::sweep_config(int thread_count) const {
  SweepConfig c;
  c.setup = point_setup();
  c.layers = layers;
  c.grid = grid();
  c.hopping = hopping;
  c.hopping.seed = seed;
  c.snap_z_seeds = snap_z_seeds;
  c.refine_rounds = refine_rounds;
  c.refine_hops = refine_hops;
  c.distance = distance;
  c.seed = seed;
  c.threads = thread_count;
  return c;
}

void RunConfig::validate() const {
  if (n_spins < minimum_spins(family)) {
    throw ConfigError("model.N: " + std::string(to_string(family)) + " needs at least " +
                      std::to_string(minimum_spins(family)) + " spins");
  }
  if (n_spins > kDefaultDenseCap) {
    throw ConfigError("model.N: at most " + std::to_string(kDefaultDenseCap) + " spins are supported");
  }
  if (!(degeneracy_tolerance > 0.0)) throw ConfigError("model.degeneracy_tolerance: must be positive");
  if (cut && (*cut < 1 || *cut >= n_spins)) throw ConfigError("model.cut: must lie in [1, N)");
  if (layers < 1) throw ConfigError("protocol.p: must be at least 1");
  if (initial != "auto" && initial != "x+" && initial != "x-" && initial != "sector") {
    throw ConfigError("protocol.initial: must be auto, x+, x- or sector");
  }
  if (magnetization && initial != "sector") throw ConfigError("protocol.magnetization: only valid with initial 'sector'");
  try {
    point_setup().protocol_for(layers).validate(n_spins);
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("protocol: ") + e.what());
  }
  if (grid_count < 2) throw ConfigError("grid.count: must be at least 2");
  const GridSpec g = grid();
  g.hx.validate("grid.hx");
  g.hz.validate("grid.hz");
  if (hopping.hops < 0) throw ConfigError("optimizer.hops: must be non-negative");
  if (!(hopping.step_size > 0.0)) throw ConfigError("optimizer.step_size: must be positive");
  if (!(hopping.temperature > 0.0)) throw ConfigError("optimizer.temperature: must be positive");
  if (!(hopping.local.tolerance > 0.0)) throw ConfigError("optimizer.tolerance: must be positive");
  if (hopping.local.max_iterations < 1) throw ConfigError("optimizer.max_iterations: must be at least 1");
  if (!(hopping.local.initial_step > 0.0)) throw ConfigError("optimizer.initial_step: must be positive");
  if (!(hopping.local.fd_step > 0.0)) throw ConfigError("optimizer.fd_step: must be positive");
  if (refine_rounds < 0) throw ConfigError("optimizer.refine_rounds: must be non-negative");
  if (refine_hops < 0) throw ConfigError("optimizer.refine_hops: must be non-negative");
  if (distance.random_starts < 0) throw ConfigError("distance.random_starts: must be non-negative");
  if (!(distance.random_range > 0.0)) throw ConfigError("distance.random_range: must be positive");
  if (distance.hopping.hops < 0) throw ConfigError("distance.hops: must be non-negative");
  for (std::size_t k = 0; k < landscape_budgets.size(); ++k) {
    if (!(landscape_budgets[k] > 0.0)) throw ConfigError("landscape.T: values must be positive");
    if (k > 0 && !(landscape_budgets[k] > landscape_budgets[k - 1])) {
      throw ConfigError("landscape.T: values must be ascending");
    }
  }
  if (distribution_samples < 1) throw ConfigError("distribution.samples: must be positive");
  if (distribution_bins < 1) throw ConfigError("distribution.bins: must be positive");
  if (!(export_budget > 0.0)) throw ConfigError("export.T: must be positive");
  if (export_count < 0) throw ConfigError("export.count: must be non-negative");
  if (histogram_bins < 1) throw ConfigError("histogram.bins: must be positive");
  if (!(histogram_delta >= 0.0)) throw ConfigError("histogram.delta: must be non-negative");
  if (std::find(experiment_names().begin(), experiment_names().end(), experiment) == experiment_names().end()) {
    throw ConfigError("experiment: unknown experiment '" + experiment + "'");
  }
  if (output.empty()) throw ConfigError("output: must not be empty");
  if (threads && *threads < 1) throw ConfigError("threads: must be at least 1");
}

RunConfig parse_config(const json& j, bool require_seed) {
  RunConfig c;
  Block top(j, "");
  if (top.has("seed")) {
    const json& s = top.raw("seed");
    if (!s.is_number_integer() || (s.is_number_integer() && !s.is_number_unsigned() && s.get<long long>() < 0)) {
      throw ConfigError("seed: must be a non-negative integer");
    }
    c.seed = s.get<std::uint64_t>();
    c.seed_given = true;
  } else if (require_seed) {
    throw ConfigError("seed: required field is missing");
  } else {
    top.mark("seed");
  }

  if (top.has("model")) {
    Block b = top.child("model");
    b.choice("family", c.family, parse_family);
    b.integer("N", c.n_spins);
    b.number("hx", c.hx);
    b.number("hz", c.hz);
    b.number("degeneracy_tolerance", c.degeneracy_tolerance);
    b.choice("degenerate_choice", c.degenerate, parse_degenerate_choice);
    b.integer("cut", c.cut);
    b.finish();
  }
  if (top.has("grid")) {
    Block b = top.child("grid");
    b.integer("count", c.grid_count);
    const GridSpec defaults = GridSpec::defaults_for(c.family, c.grid_count);
    if (b.has("hx")) c.grid_hx = parse_axis(b.child("hx"), defaults.hx);
    if (b.has("hz")) c.grid_hz = parse_axis(b.child("hz"), defaults.hz);
    b.numbers("extra_hz", c.extra_hz);
    b.finish();
  }
  if (top.has("protocol")) {
    Block b = top.child("protocol");
    b.text("name", c.protocol);
    b.integer("p", c.layers);
    b.text("initial", c.initial);
    b.integer("magnetization", c.magnetization);
    b.finish();
  }
  top.choice("cost", c.cost, parse_cost_kind);
  top.choice("fidelity_target", c.fidelity, parse_fidelity_mode);
  if (top.has("optimizer")) {
    Block b = top.child("optimizer");
    b.integer("hops", c.hopping.hops);
    b.number("step_size", c.hopping.step_size);
    b.number("temperature", c.hopping.temperature);
    b.choice("local", c.hopping.local.method, parse_local_method);
    b.number("tolerance", c.hopping.local.tolerance);
    b.integer("max_iterations", c.hopping.local.max_iterations);
    b.number("initial_step", c.hopping.local.initial_step);
    b.number("fd_step", c.hopping.local.fd_step);
    b.integer("refine_rounds", c.refine_rounds);
    b.integer("refine_hops", c.refine_hops);
    b.flag("snap_z_seeds", c.snap_z_seeds);
    b.finish();
  }
  if (top.has("distance")) {
    Block b = top.child("distance");
    b.integer("random_starts", c.distance.random_starts);
    b.number("random_range", c.distance.random_range);
    b.integer("hops", c.distance.hopping.hops);
    b.finish();
  }
  if (top.has("landscape")) {
    Block b = top.child("landscape");
    b.points("points", c.landscape_points);
    b.numbers("T", c.landscape_budgets);
    b.choice("mode", c.landscape_mode, parse_time_constraint);
    b.finish();
  }
  if (top.has("distribution")) {
    Block b = top.child("distribution");
    b.points("points", c.distribution_points);
    b.integer("samples", c.distribution_samples);
    b.integer("bins", c.distribution_bins);
    b.finish();
  }
  if (top.has("export")) {
    Block b = top.child("export");
    b.number("hx", c.export_hx);
    b.number("hz", c.export_hz);
    b.number("T", c.export_budget);
    b.choice("mode", c.export_mode, parse_time_constraint);
    b.integer("count", c.export_count);
    b.finish();
  }
  if (top.has("histogram")) {
    Block b = top.child("histogram");
    std::string records;
    b.text("records", records);
    if (!records.empty()) c.records = records;
    b.integer("bins", c.histogram_bins);
    b.number("delta", c.histogram_delta);
    b.finish();
  }
  if (top.has("correlate")) {
    Block b = top.child("correlate");
    std::string records;
    b.text("records", records);
    if (!records.empty()) c.records = records;
    b.finish();
  }
  top.text("experiment", c.experiment);
  top.text("output", c.output);
  top.integer("threads", c.threads);
  top.finish();
  c.validate();
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream text;
  text << in.rdbuf();
  json j;
  try {
    j = json::parse(text.str(), nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError("config file " + path.string() + " is not valid JSON: " + e.what());
  }
  return parse_config(j, true);
}

json to_json(const RunConfig& c) {
  const GridSpec g = c.grid();
  json j;
  j["seed"] = c.seed;
  j["model"] = {{"family", std::string(to_string(c.family))},
                {"N", c.n_spins},
                {"hx", c.hx},
                {"hz", c.hz},
                {"degeneracy_tolerance", c.degeneracy_tolerance},
                {"degenerate_choice", std::string(to_string(c.degenerate))},
                {"cut", c.cut ? json(*c.cut) : json(c.n_spins / 2)}};
  j["grid"] = {{"count", c.grid_count}, {"hx", axis_json(g.hx)}, {"hz", axis_json(g.hz)}, {"extra_hz", c.extra_hz}};
  j["protocol"] = {{"name", c.protocol}, {"p", c.layers}, {"initial", c.initial},
                   {"magnetization", optional_json(c.magnetization)}};
  j["cost"] = std::string(to_string(c.cost));
  j["fidelity_target"] = std::string(to_string(c.fidelity));
  j["optimizer"] = {{"hops", c.hopping.hops},
                    {"step_size", c.hopping.step_size},
                    {"temperature", c.hopping.temperature},
                    {"local", std::string(to_string(c.hopping.local.method))},
                    {"tolerance", c.hopping.local.tolerance},
                    {"max_iterations", c.hopping.local.max_iterations},
                    {"initial_step", c.hopping.local.initial_step},
                    {"fd_step", c.hopping.local.fd_step},
                    {"refine_rounds", c.refine_rounds},
                    {"refine_hops", c.refine_hops},
                    {"snap_z_seeds", c.snap_z_seeds}};
  j["distance"] = {{"random_starts", c.distance.random_starts},
                   {"random_range", c.distance.random_range},
                   {"hops", c.distance.hopping.hops}};
  j["landscape"] = {{"points", points_json(c.landscape_points)},
                    {"T", c.landscape_budgets},
                    {"mode", std::string(to_string(c.landscape_mode))}};
  j["distribution"] = {{"points", points_json(c.distribution_points)},
                       {"samples", c.distribution_samples},
                       {"bins", c.distribution_bins}};
  j["export"] = {{"hx", c.export_hx}, {"hz", c.export_hz}, {"T", c.export_budget},
                 {"mode", std::string(to_string(c.export_mode))}, {"count", c.export_count}};
  j["histogram"] = {{"records", optional_json(c.records)}, {"bins", c.histogram_bins}, {"delta", c.histogram_delta}};
  j["correlate"] = {{"records", optional_json(c.records)}};
  j["experiment"] = c.experiment;
  j["output"] = c.output;
  j["threads"] = optional_json(c.threads);
  return j;
}

}  // namespace qaoalab
