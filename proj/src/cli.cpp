#include "qaoalab/cli.hpp"

#include "qaoalab/config.hpp"
#include "qaoalab/errors.hpp"
#include "qaoalab/experiments.hpp"
#include "qaoalab/persistence.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <thread>

namespace qaoalab {

namespace {

using nlohmann::json;

struct Overrides {
  std::string config;
  std::string family;
  int n_spins = 0;
  double hx = 0.0;
  double hz = 0.0;
  int layers = 0;
  std::string protocol;
  std::string initial;
  std::string cost;
  std::uint64_t seed = 0;
  int hops = 0;
  int threads = 0;
  int grid_count = 0;
  std::string out;
  std::string records;
  std::string spectrum;
  int modes = 0;
  std::string mode;
  std::vector<double> budgets;
  int samples = 0;
  int count = 0;
};

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string sci(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6e", v);
  return buf;
}

void add_common(CLI::App* sub, Overrides& o) {
  sub->add_option("--config", o.config, "JSON run configuration");
  sub->add_option("--family", o.family, "fm | afm | threespin");
  sub->add_option("--N", o.n_spins, "number of spins");
  sub->add_option("--hx", o.hx, "transverse field");
  sub->add_option("--hz", o.hz, "longitudinal field");
  sub->add_option("--p", o.layers, "number of layers");
  sub->add_option("--protocol", o.protocol, "ising3 | ising2 | threespin3 | appendix2 | appendix3");
  sub->add_option("--initial", o.initial, "auto | x+ | x- | sector");
  sub->add_option("--cost", o.cost, "infidelity | energy | relent");
  sub->add_option("--seed", o.seed, "master RNG seed");
  sub->add_option("--hops", o.hops, "basin-hopping hops");
  sub->add_option("--threads", o.threads, "worker threads (default: QAOALAB_THREADS, then all cores)");
  sub->add_option("--grid", o.grid_count, "points per grid axis");
  sub->add_option("--out", o.out, "output directory");
}

bool given(CLI::App* sub, const std::string& name) {
  const CLI::Option* opt = sub->get_option_no_throw(name);
  return opt != nullptr && opt->count() > 0;
}

RunConfig resolve(CLI::App* sub, const Overrides& o) {
  RunConfig c;
  if (!o.config.empty()) c = load_config(o.config);
  try {
    if (given(sub, "--family")) {
      const auto natural = [](Family f) { return f == Family::ThreeSpin ? "threespin3" : "ising3"; };
      const Family previous = c.family;
      c.family = parse_family(o.family);
      if (!given(sub, "--protocol") && c.protocol == natural(previous)) c.protocol = natural(c.family);
    }
    if (given(sub, "--N")) c.n_spins = o.n_spins;
    if (given(sub, "--hx")) c.hx = o.hx;
    if (given(sub, "--hz")) c.hz = o.hz;
    if (given(sub, "--p")) c.layers = o.layers;
    if (given(sub, "--protocol")) c.protocol = o.protocol;
    if (given(sub, "--initial")) c.initial = o.initial;
    if (given(sub, "--cost")) c.cost = parse_cost_kind(o.cost);
    if (given(sub, "--seed")) {
      c.seed = o.seed;
      c.seed_given = true;
    }
    if (given(sub, "--hops")) c.hopping.hops = o.hops;
    if (given(sub, "--threads")) c.threads = o.threads;
    if (given(sub, "--grid")) {
      c.grid_count = o.grid_count;
      if (c.grid_hx) c.grid_hx->count = o.grid_count;
      if (c.grid_hz) c.grid_hz->count = o.grid_count;
    }
    if (given(sub, "--out")) c.output = o.out;
    if (given(sub, "--records")) c.records = o.records;
    if (given(sub, "--mode")) {
      if (sub->get_name() == "export-samples") c.export_mode = parse_time_constraint(o.mode);
      else c.landscape_mode = parse_time_constraint(o.mode);
    }
    if (given(sub, "--T")) {
      if (sub->get_name() == "export-samples") {
        if (o.budgets.size() != 1) throw ConfigError("--T: export-samples takes a single budget");
        c.export_budget = o.budgets.front();
      } else {
        c.landscape_budgets = o.budgets;
      }
    }
    if (given(sub, "--samples")) c.distribution_samples = o.samples;
    if (given(sub, "--count")) c.export_count = o.count;
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("command line: ") + e.what());
  }
  if (sub->get_name() != "validate") c.experiment = sub->get_name();
  c.validate();
  return c;
}

int thread_count(const RunConfig& c, CLI::App* sub) {
  if (given(sub, "--threads")) return *c.threads;
  if (const char* env = std::getenv("QAOALAB_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 1) throw ConfigError("QAOALAB_THREADS must be a positive integer");
    return static_cast<int>(v);
  }
  if (c.threads) return *c.threads;
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

void write_json(const json& j, const std::filesystem::path& path) {
  auto out = open_output(path);
  out << j.dump(2) << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

/// Final-stage record of every (p, row, col) in a ledger that may hold several stages.
std::vector<SweepRecord> latest_records(const std::vector<SweepRecord>& all) {
  auto rank = [](const std::string& stage) { return stage == "initial" ? 0 : std::atoi(stage.c_str() + 6); };
  std::map<std::tuple<int, int, int>, SweepRecord> latest;
  for (const auto& r : all) {
    const auto key = std::make_tuple(r.p, r.row, r.col);
    auto it = latest.find(key);
    if (it == latest.end() || rank(r.stage) >= rank(it->second.stage)) latest[key] = r;
  }
  std::vector<SweepRecord> out;
  for (auto& [k, r] : latest) out.push_back(std::move(r));
  return out;
}

std::filesystem::path records_path(const RunConfig& c) {
  return c.records ? std::filesystem::path(*c.records) : std::filesystem::path(c.output) / "records.jsonl";
}

std::vector<SweepRecord> load_latest(const RunConfig& c) {
  const auto path = records_path(c);
  if (!std::filesystem::exists(path)) throw IoError("records file " + path.string() + " does not exist");
  return latest_records(read_records(path));
}

json correlation_json(const Correlation& r) {
  return {{"count", r.count}, {"log_r", r.log_r ? json(*r.log_r) : json(nullptr)},
          {"raw_r", r.raw_r ? json(*r.raw_r) : json(nullptr)}};
}

std::string describe_r(const std::optional<double>& r) { return r ? fixed(*r, 4) : "undefined"; }

int cmd_sweep(const RunConfig& c, int threads, std::ostream& out) {
  const std::filesystem::path dir(c.output);
  const SweepConfig sc = c.sweep_config(threads);
  const SweepOutput result = sweep(sc, dir / "records.jsonl", [&](const SweepRecord& r) {
    if (r.p != sc.layers) return;
    out << "[" << r.stage << "] row=" << r.row << " col=" << r.col << " hx=" << fixed(r.hx, 4) << " hz=" << fixed(r.hz, 4);
    if (r.ok()) {
      out << " p=" << r.p << " " << r.cost_kind << "=" << sci(r.best_cost) << " D_F=" << sci(r.df)
          << " VNE=" << fixed(r.vne, 6);
      if (r.df_exceeds_bound) out << " (D_F above 3-2sqrt2)";
    } else {
      out << " FAILED: " << *r.error;
    }
    out << "\n" << std::flush;
  });
  write_summary_csv(result.records, dir / "summary.csv");
  write_sweep_heatmaps(result, c.family, dir);
  json report = json::object();
  for (int p = 1; p <= sc.layers; ++p) {
    try {
      const Correlation r = correlate(result.records, p);
      report["p" + std::to_string(p)] = correlation_json(r);
      out << "p=" << p << " log-log Pearson r(D_F, cost) = " << describe_r(r.log_r) << " (raw " << describe_r(r.raw_r)
          << ", " << r.count << " points)\n";
    } catch (const ConfigError&) {
      report["p" + std::to_string(p)] = nullptr;
    }
  }
  write_json(report, dir / "correlation.json");
  const auto failed = std::count_if(result.records.begin(), result.records.end(), [](const auto& r) { return !r.ok(); });
  out << "records: " << result.records.size() << " (" << failed << " failed) -> " << (dir / "records.jsonl").string()
      << "\n";
  return 0;
}

int cmd_qaoa(const RunConfig& c, std::ostream& out) {
  const PointSetup setup = c.point_setup();
  const PreparedPoint point = prepare_point(setup, c.hx, c.hz);
  const CostFunction cost = make_cost(setup, point, c.layers);
  std::mt19937_64 rng(derive_seed(c.seed, {0}));
  SequentialOptions options{c.hopping, c.snap_z_seeds};
  options.hopping.seed = derive_seed(c.seed, {1});
  const auto results = optimize_sequential(cost, random_schedule(setup.protocol_for(1), rng), options);
  json report = json::array();
  double final_infidelity = 0.0;
  for (const auto& res : results) {
    const CostFunction at_p = with_layers(cost, res.schedule.layers());
    const StateVector state = evolve(at_p.protocol(), res.schedule, point.model);
    const double inf = at_p.infidelity(state);
    const double rel = point.exact.e_max > point.exact.e_min ? at_p.relative_energy(state) : 0.0;
    final_infidelity = inf;
    out << "p=" << res.schedule.layers() << " cost=" << sci(res.opt.best_cost) << " infidelity=" << sci(inf)
        << " relative_energy=" << sci(rel) << "\n";
    json angles = json::array();
    for (int i = 0; i < res.schedule.layers(); ++i) {
      json row = json::array();
      for (int j = 0; j < res.schedule.generators(); ++j) row.push_back(res.schedule(i, j));
      angles.push_back(row);
    }
    report.push_back({{"p", res.schedule.layers()}, {"cost", res.opt.best_cost}, {"infidelity", inf},
                      {"relative_energy", rel}, {"schedule", angles}, {"evaluations", res.opt.evaluations}});
  }
  write_json(report, std::filesystem::path(c.output) / "qaoa.json");
  out << "infidelity = " << sci(final_infidelity) << "\n";
  return 0;
}

int cmd_df(const RunConfig& c, const Overrides& o, CLI::App* sub, std::ostream& out) {
  ProbabilitySpectrum spectrum;
  int modes = 0;
  if (given(sub, "--spectrum")) {
    spectrum = read_spectrum(o.spectrum);
    modes = given(sub, "--modes") ? o.modes
                                  : static_cast<int>(std::ceil(std::log2(static_cast<double>(spectrum.size())) - 1e-9));
  } else {
    const PreparedPoint point = prepare_point(c.point_setup(), c.hx, c.hz);
    spectrum = point.spectrum;
    modes = given(sub, "--modes") ? o.modes : point.target.cut;
  }
  if (modes < 1 || modes > 20) throw ConfigError("--modes: must lie in [1, 20]");
  DistanceConfig config = c.distance;
  config.hopping.seed = derive_seed(c.seed, {0xDF});
  const InteractionDistance d = interaction_distance(spectrum, modes, config);
  out << "D_F = " << fixed(d.distance, 6) << "\n";
  out << "VNE = " << fixed(von_neumann_entropy(spectrum), 6) << "\n";
  if (d.exceeds_conjectured_bound) out << "warning: D_F exceeds the conjectured bound 3-2sqrt(2)\n";
  write_json({{"df", d.distance}, {"energies", d.energies}, {"seed_distance", d.seed_distance},
              {"exceeds_conjectured_bound", d.exceeds_conjectured_bound}, {"modes", modes},
              {"vne", von_neumann_entropy(spectrum)}, {"spectrum", spectrum.values()}},
             std::filesystem::path(c.output) / "df.json");
  return 0;
}

int cmd_landscape(const RunConfig& c, int threads, std::ostream& out) {
  BasinHopConfig hopping = c.hopping;
  hopping.seed = c.seed;
  const auto rows = landscape_scan(c.point_setup(), c.layers, c.landscape_points, c.landscape_budgets,
                                   c.landscape_mode, hopping, threads);
  write_landscape_csv(rows, std::filesystem::path(c.output) / "landscape.csv");
  for (const auto& r : rows) {
    out << "hx=" << fixed(r.hx, 4) << " hz=" << fixed(r.hz, 4) << " T" << to_string(r.mode) << fixed(r.budget, 4)
        << " epsilon=" << sci(r.epsilon) << " total_time=" << fixed(r.total_time, 6) << "\n";
  }
  return 0;
}

int cmd_distribution(const RunConfig& c, int threads, std::ostream& out) {
  const std::filesystem::path dir(c.output);
  json report = json::array();
  for (std::size_t k = 0; k < c.distribution_points.size(); ++k) {
    const auto [hx, hz] = c.distribution_points[k];
    DistributionConfig dc;
    dc.samples = c.distribution_samples;
    dc.bins = c.distribution_bins;
    dc.local = c.hopping.local;
    dc.seed = derive_seed(c.seed, {k});
    dc.threads = threads;
    const EpsilonDistribution d = epsilon_distribution(c.point_setup(), c.layers, hx, hz, dc);
    const std::string tag = "point" + std::to_string(k);
    write_samples_csv(d.samples, dir / ("distribution_" + tag + "_samples.csv"));
    write_histogram_csv(d.histogram, dir / ("distribution_" + tag + "_histogram.csv"));
    out << "hx=" << fixed(hx, 4) << " hz=" << fixed(hz, 4) << " samples=" << d.samples.size()
        << " median log10(eps)=" << fixed(d.median_log10, 4) << " zero-start eps=" << sci(d.zero_start) << "\n";
    report.push_back({{"hx", hx}, {"hz", hz}, {"median_log10", d.median_log10}, {"zero_start", d.zero_start},
                      {"samples", d.samples.size()}});
  }
  write_json(report, dir / "distribution.json");
  return 0;
}

int cmd_correlate(const RunConfig& c, std::ostream& out) {
  const auto records = load_latest(c);
  std::vector<int> depths;
  for (const auto& r : records) depths.push_back(r.p);
  std::sort(depths.begin(), depths.end());
  depths.erase(std::unique(depths.begin(), depths.end()), depths.end());
  json report = json::object();
  for (int p : depths) {
    const Correlation r = correlate(records, p);
    report["p" + std::to_string(p)] = correlation_json(r);
    out << "p=" << p << " log-log Pearson r(D_F, cost) = " << describe_r(r.log_r) << " (raw " << describe_r(r.raw_r)
        << ", " << r.count << " points)\n";
  }
  write_json(report, std::filesystem::path(c.output) / "correlation.json");
  return 0;
}

int cmd_histogram(const RunConfig& c, std::ostream& out) {
  const auto all = load_latest(c);
  if (all.empty()) throw ConfigError("no records to histogram");
  int depth = 0;
  for (const auto& r : all) depth = std::max(depth, r.p);
  std::vector<SweepRecord> records;
  std::copy_if(all.begin(), all.end(), std::back_inserter(records), [depth](const auto& r) { return r.p == depth; });
  std::size_t generators = 0;
  for (const auto& r : records) {
    if (r.ok() && !r.schedule.empty()) generators = std::max(generators, r.schedule.front().size());
  }
  json report = json::array();
  for (std::size_t j = 0; j < generators; ++j) {
    const AngleHistogram h = angle_histogram(records, static_cast<int>(j), c.histogram_bins, c.histogram_delta);
    write_histogram_csv(h.histogram, std::filesystem::path(c.output) / ("histogram_theta" + std::to_string(j + 1) + ".csv"));
    out << "p=" << depth << " theta_" << j + 1 << ": " << h.angles << " angles, fraction within " << c.histogram_delta
        << " of a multiple of pi/2 = " << fixed(h.near_multiple_fraction, 4) << "\n";
    report.push_back({{"generator", j + 1}, {"angles", h.angles}, {"near_multiple_fraction", h.near_multiple_fraction}});
  }
  write_json(report, std::filesystem::path(c.output) / "histogram.json");
  return 0;
}

int cmd_export(const RunConfig& c, int threads, std::ostream& out) {
  const auto path = std::filesystem::path(c.output) / "samples.tsv";
  const auto samples = export_samples_for_embedding(c.point_setup(), c.layers, c.export_hx, c.export_hz, c.export_mode,
                                                    c.export_budget, c.export_count, c.hopping.local, c.seed, path,
                                                    threads);
  out << "wrote " << samples.size() << " samples to " << path.string() << "\n";
  return 0;
}

void report_error(std::ostream& err, const char* kind, int code, const std::string& message) {
  err << json{{"status", "error"}, {"kind", kind}, {"exit_code", code}, {"message", message}}.dump() << "\n";
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Exact state-vector QAOA and interaction-distance laboratory", "qaoalab"};
  app.require_subcommand(1);
  Overrides o;
  std::map<std::string, CLI::App*> subs;
  const std::vector<std::pair<std::string, std::string>> commands{
      {"sweep", "phase-diagram sweep with refinement rounds"},
      {"qaoa", "optimize one point for p = 1..P"},
      {"df", "interaction distance of a spectrum file or of a model ground state"},
      {"landscape", "best relative energy under a total-time constraint"},
      {"distribution", "relative energies of local minima from random starts"},
      {"correlate", "Pearson correlation of D_F and cost in a records file"},
      {"histogram", "histograms of optimal angles in a records file"},
      {"export-samples", "locally optimized angle samples for external embedding"},
      {"validate", "check a configuration and print every resolved value"}};
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    add_common(sub, o);
    subs[name] = sub;
  }
  subs["df"]->add_option("--spectrum", o.spectrum, "spectrum file, one probability per line");
  subs["df"]->add_option("--modes", o.modes, "number of free modes");
  for (const char* name : {"correlate", "histogram"}) subs[name]->add_option("--records", o.records, "records.jsonl");
  for (const char* name : {"landscape", "export-samples"}) {
    subs[name]->add_option("--mode", o.mode, "<= or =");
    subs[name]->add_option("--T", o.budgets, "total-time budget(s)");
  }
  subs["distribution"]->add_option("--samples", o.samples, "random starts per point");
  subs["export-samples"]->add_option("--count", o.count, "number of samples");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return 0;
    }
    report_error(err, "config", kExitConfig, e.what());
    return kExitConfig;
  }

  CLI::App* sub = app.get_subcommands().front();
  try {
    const RunConfig config = resolve(sub, o);
    const json effective = to_json(config);
    if (sub->get_name() == "validate") {
      out << json{{"status", "ok"}, {"config", effective}}.dump(2) << "\n";
      return 0;
    }
    const int threads = thread_count(config, sub);
    std::error_code ec;
    std::filesystem::create_directories(config.output, ec);
    if (ec) throw IoError("cannot create output directory " + config.output + ": " + ec.message());
    write_json(effective, std::filesystem::path(config.output) / "effective_config.json");

    const std::string& name = sub->get_name();
    if (name == "sweep") return cmd_sweep(config, threads, out);
    if (name == "qaoa") return cmd_qaoa(config, out);
    if (name == "df") return cmd_df(config, o, sub, out);
    if (name == "landscape") return cmd_landscape(config, threads, out);
    if (name == "distribution") return cmd_distribution(config, threads, out);
    if (name == "correlate") return cmd_correlate(config, out);
    if (name == "histogram") return cmd_histogram(config, out);
    if (name == "export-samples") return cmd_export(config, threads, out);
    throw ConfigError("unknown subcommand " + name);
  } catch (const ConfigError& e) {
    report_error(err, "config", kExitConfig, e.what());
    return kExitConfig;
  } catch (const NumericError& e) {
    report_error(err, "numeric", kExitNumeric, e.what());
    return kExitNumeric;
  } catch (const IoError& e) {
    report_error(err, "io", kExitIo, e.what());
    return kExitIo;
  } catch (const std::filesystem::filesystem_error& e) {
    report_error(err, "io", kExitIo, e.what());
    return kExitIo;
  } catch (const std::exception& e) {
    report_error(err, "numeric", kExitNumeric, e.what());
    return kExitNumeric;
  }
}

}  // namespace qaoalab
