#include "qaoalab/experiments.hpp"

#include "qaoalab/errors.hpp"
#include "qaoalab/parallel.hpp"
#include "qaoalab/persistence.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <memory>
#include <numbers>
#include <numeric>
#include <tuple>

namespace qaoalab {

namespace {

constexpr double kPi = std::numbers::pi;

double log_floored(double v) { return std::log10(std::max(v, kLogFloor)); }

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t mid = v.size() / 2;
  return v.size() % 2 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

bool has_generator(const Protocol& protocol, GeneratorLabel label) {
  return std::find(protocol.generators.begin(), protocol.generators.end(), label) != protocol.generators.end();
}

std::vector<std::vector<double>> rows_of(const AngleSchedule& schedule) {
  std::vector<std::vector<double>> rows(static_cast<std::size_t>(schedule.layers()));
  for (int i = 0; i < schedule.layers(); ++i) {
    for (int j = 0; j < schedule.generators(); ++j) rows[static_cast<std::size_t>(i)].push_back(schedule(i, j));
  }
  return rows;
}

std::vector<double> flatten(const std::vector<std::vector<double>>& rows) {
  std::vector<double> flat;
  for (const auto& r : rows) flat.insert(flat.end(), r.begin(), r.end());
  return flat;
}

std::string stage_name(int round) { return round == 0 ? "initial" : "refine" + std::to_string(round); }

/// Fills the schedule-dependent fields of a record.
void score(SweepRecord& record, const CostFunction& cost, const AngleSchedule& schedule, double best_cost) {
  const Protocol& protocol = cost.protocol();
  const int n = cost.model().n_spins;
  record.best_cost = best_cost;
  record.schedule = rows_of(schedule);
  const StateVector state = evolve(protocol, schedule, n);
  record.infidelity = cost.has_fidelity_target() ? std::optional(cost.infidelity(state)) : std::nullopt;
  const auto& range = cost.target().energies;
  record.relative_energy =
      (range && range->e_max > range->e_min) ? std::optional(cost.relative_energy(state)) : std::nullopt;
  record.snapped_infidelity.reset();
  if (cost.has_fidelity_target() && has_generator(protocol, GeneratorLabel::Z)) {
    record.snapped_infidelity = cost.infidelity(evolve(protocol, snap_z_angles(schedule, protocol), n));
  }
}

using StageKey = std::tuple<std::string, int, std::size_t>;

}  // namespace

std::vector<double> GridAxis::values() const {
  std::vector<double> v(static_cast<std::size_t>(std::max(count, 0)));
  const double span = hi - lo;
  for (int k = 0; k < count; ++k) {
    double t = 0.0;
    if (include_lo && include_hi) t = count > 1 ? static_cast<double>(k) / (count - 1) : 0.0;
    else if (include_hi) t = static_cast<double>(k + 1) / count;
    else if (include_lo) t = static_cast<double>(k) / count;
    else t = static_cast<double>(k + 1) / (count + 1);
    v[static_cast<std::size_t>(k)] = lo + span * t;
  }
  return v;
}

void GridAxis::validate(const std::string& name) const {
  if (!std::isfinite(lo) || !std::isfinite(hi)) throw ConfigError(name + ": range must be finite");
  if (!(hi > lo)) throw ConfigError(name + ": max must exceed min");
  if (count < 2) throw ConfigError(name + ".count: must be at least 2");
}

GridSpec GridSpec::defaults_for(Family family, int count) {
  GridSpec g;
  g.hx = {0.0, 2.0, count, false, true};
  if (family == Family::ThreeSpin) g.hz = {-3.0, 0.0, count, true, false};
  else g.hz = {0.0, 2.0, count, false, true};
  return g;
}

std::vector<double> GridSpec::hx_values() const { return hx.values(); }

std::vector<double> GridSpec::hz_values() const {
  std::vector<double> v = hz.values();
  for (double h : extra_hz) {
    if (!std::isfinite(h)) throw ConfigError("grid.extra_hz: values must be finite");
    v.push_back(h);
  }
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end(), [](double a, double b) { return std::abs(a - b) < 1e-12; }), v.end());
  return v;
}

std::string_view to_string(FidelityMode mode) {
  return mode == FidelityMode::Projector ? "projector" : "representative";
}

FidelityMode parse_fidelity_mode(std::string_view name) {
  if (name == "projector") return FidelityMode::Projector;
  if (name == "representative") return FidelityMode::Representative;
  throw ConfigError("unknown fidelity target '" + std::string(name) + "'");
}

Protocol PointSetup::protocol_for(int layers) const {
  return make_protocol(protocol, layers, initial ? *initial : default_initial(protocol, n_spins));
}

PreparedPoint prepare_point(const PointSetup& setup, double hx, double hz) {
  SpinChainModel model = build_model(setup.family, setup.n_spins, hx, hz);
  ExactSolution exact = solve_exact(model, setup.degeneracy_tolerance);
  StateVector representative = representative_state(exact.ground, setup.degenerate);
  const int cut = setup.effective_cut();
  if (cut < 1 || cut >= setup.n_spins) throw ConfigError("model.cut: must lie in [1, N)");
  ProbabilitySpectrum spectrum = entanglement_spectrum(representative, cut);
  CostTarget target;
  if (setup.fidelity == FidelityMode::Projector) target.fidelity = exact.ground;
  else target.fidelity = representative;
  target.energies = EnergyRange{exact.e_min, exact.e_max};
  target.spectrum = spectrum;
  target.cut = cut;
  return {std::move(model), std::move(exact), std::move(representative), std::move(spectrum), std::move(target)};
}

CostFunction make_cost(const PointSetup& setup, const PreparedPoint& point, int layers) {
  return CostFunction(setup.protocol_for(layers), point.model, setup.cost, point.target);
}

SweepOutput sweep(const SweepConfig& config, const std::optional<std::filesystem::path>& ledger_path,
                  const RecordSink& on_record) {
  if (config.layers < 1) throw ConfigError("protocol.p: must be at least 1");
  if (config.refine_rounds < 0) throw ConfigError("optimizer.refine_rounds: must be non-negative");
  config.hopping.validate();
  config.grid.hx.validate("grid.hx");
  config.grid.hz.validate("grid.hz");
  config.setup.protocol_for(config.layers).validate(config.setup.n_spins);

  SweepOutput output;
  output.hx_values = config.grid.hx_values();
  output.hz_values = config.grid.hz_values();
  output.shape = {static_cast<int>(output.hz_values.size()), static_cast<int>(output.hx_values.size())};
  const std::size_t points = output.shape.size();
  const int depth = config.layers;
  const int cols = output.shape.cols;
  auto hx_of = [&](std::size_t i) { return output.hx_values[i % static_cast<std::size_t>(cols)]; };
  auto hz_of = [&](std::size_t i) { return output.hz_values[i / static_cast<std::size_t>(cols)]; };

  std::map<StageKey, SweepRecord> done;
  std::unique_ptr<RecordLedger> ledger;
  if (ledger_path) {
    if (std::filesystem::exists(*ledger_path)) {
      for (auto& r : read_records(*ledger_path)) {
        const auto index = static_cast<std::size_t>(r.row) * static_cast<std::size_t>(cols) +
                           static_cast<std::size_t>(r.col);
        if (r.row < 0 || r.row >= output.shape.rows || r.col < 0 || r.col >= cols ||
            std::abs(r.hx - hx_of(index)) > 1e-12 || std::abs(r.hz - hz_of(index)) > 1e-12 ||
            r.n_spins != config.setup.n_spins || r.family != to_string(config.setup.family) ||
            r.protocol != config.setup.protocol || r.seed != config.seed || r.p < 1 || r.p > depth) {
          throw ConfigError("ledger " + ledger_path->string() + " was written by a different configuration");
        }
        done[{r.stage, r.p, index}] = std::move(r);
      }
    }
    ledger = std::make_unique<RecordLedger>(*ledger_path);
  }
  std::mutex emit_mutex;
  auto emit = [&](const SweepRecord& r) {
    if (ledger) ledger->append(r);
    if (on_record) {
      std::lock_guard lock(emit_mutex);
      on_record(r);
    }
  };

  // stages[round][p - 1][index]
  std::vector<std::vector<std::vector<SweepRecord>>> stages(
      static_cast<std::size_t>(config.refine_rounds) + 1,
      std::vector<std::vector<SweepRecord>>(static_cast<std::size_t>(depth), std::vector<SweepRecord>(points)));
  std::vector<std::shared_ptr<const PreparedPoint>> prepared(points);

  auto prepared_at = [&](std::size_t index) -> const PreparedPoint& {
    if (!prepared[index]) {
      prepared[index] = std::make_shared<const PreparedPoint>(prepare_point(config.setup, hx_of(index), hz_of(index)));
    }
    return *prepared[index];
  };

  parallel_for(points, config.threads, [&](std::size_t index) {
    bool complete = true;
    for (int p = 1; p <= depth; ++p) complete = complete && done.count({stage_name(0), p, index});
    if (complete) {
      for (int p = 1; p <= depth; ++p) stages[0][static_cast<std::size_t>(p - 1)][index] = done.at({stage_name(0), p, index});
      return;
    }
    const auto start = std::chrono::steady_clock::now();
    SweepRecord base;
    base.family = std::string(to_string(config.setup.family));
    base.n_spins = config.setup.n_spins;
    base.hx = hx_of(index);
    base.hz = hz_of(index);
    base.row = static_cast<int>(index) / cols;
    base.col = static_cast<int>(index) % cols;
    base.protocol = config.setup.protocol;
    base.initial = describe(config.setup.protocol_for(1).initial);
    base.cost_kind = std::string(to_string(config.setup.cost));
    base.stage = stage_name(0);
    base.seed = config.seed;
    std::vector<SweepRecord> out(static_cast<std::size_t>(depth), base);
    try {
      const PreparedPoint& point = prepared_at(index);
      DistanceConfig distance = config.distance;
      distance.hopping.seed = derive_seed(config.seed, {index, 0xDF});
      const InteractionDistance df = interaction_distance(point.spectrum, point.target.cut, distance);
      base.df = df.distance;
      base.df_exceeds_bound = df.exceeds_conjectured_bound;
      base.vne = von_neumann_entropy(point.spectrum);
      base.e_min = point.exact.e_min;
      base.e_max = point.exact.e_max;
      base.degeneracy = point.exact.ground.degeneracy();

      const CostFunction cost = make_cost(config.setup, point, depth);
      std::mt19937_64 rng(derive_seed(config.seed, {index, 0}));
      const AngleSchedule first = random_schedule(config.setup.protocol_for(1), rng);
      SequentialOptions options{config.hopping, config.snap_z_seeds};
      options.hopping.seed = derive_seed(config.seed, {index, 1});
      const auto results = optimize_sequential(cost, first, options);
      for (int p = 1; p <= depth; ++p) {
        const auto& res = results[static_cast<std::size_t>(p - 1)];
        SweepRecord r = base;
        r.p = p;
        r.evaluations = res.opt.evaluations;
        score(r, with_layers(cost, p), res.schedule, res.opt.best_cost);
        out[static_cast<std::size_t>(p - 1)] = std::move(r);
      }
    } catch (const std::exception& e) {
      for (int p = 1; p <= depth; ++p) {
        out[static_cast<std::size_t>(p - 1)] = base;
        out[static_cast<std::size_t>(p - 1)].p = p;
        out[static_cast<std::size_t>(p - 1)].error = e.what();
      }
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    for (int p = 1; p <= depth; ++p) {
      auto& r = out[static_cast<std::size_t>(p - 1)];
      r.wall_seconds = wall;
      emit(r);
      stages[0][static_cast<std::size_t>(p - 1)][index] = std::move(r);
    }
  });

  for (int round = 1; round <= config.refine_rounds; ++round) {
    for (int p = 1; p <= depth; ++p) {
      const auto& previous = stages[static_cast<std::size_t>(round - 1)][static_cast<std::size_t>(p - 1)];
      auto& current = stages[static_cast<std::size_t>(round)][static_cast<std::size_t>(p - 1)];
      std::vector<OptResult> grid(points);
      for (std::size_t i = 0; i < points; ++i) {
        if (!previous[i].ok()) continue;
        grid[i].best_x = flatten(previous[i].schedule);
        grid[i].best_cost = previous[i].best_cost;
      }
      BasinHopConfig hopping = config.hopping;
      hopping.hops = config.refine_hops;
      hopping.seed = derive_seed(config.seed, {0x5EF, static_cast<std::uint64_t>(round), static_cast<std::uint64_t>(p)});
      parallel_for(points, config.threads, [&](std::size_t index) {
        const StageKey key{stage_name(round), p, index};
        if (auto it = done.find(key); it != done.end()) {
          current[index] = it->second;
          return;
        }
        SweepRecord r = previous[index];
        r.stage = stage_name(round);
        if (r.ok()) {
          const auto start = std::chrono::steady_clock::now();
          try {
            const CostFunction cost = make_cost(config.setup, prepared_at(index), p);
            const Objective objective = [&cost](std::span<const double> x) { return cost(x); };
            const OptResult refined = refine_point(grid, output.shape, index, objective, hopping);
            r.evaluations = refined.evaluations;
            if (refined.best_cost < previous[index].best_cost) {
              const Protocol& protocol = cost.protocol();
              const AngleSchedule schedule = reduce_angles(
                  AngleSchedule::from_flat(refined.best_x, protocol.layers, protocol.generator_count()), protocol);
              score(r, cost, schedule, refined.best_cost);
            }
          } catch (const std::exception& e) {
            r.error = e.what();
          }
          r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        }
        emit(r);
        current[index] = std::move(r);
      });
    }
  }

  for (const auto& stage : stages) {
    for (const auto& at_p : stage) output.history.insert(output.history.end(), at_p.begin(), at_p.end());
  }
  for (const auto& at_p : stages.back()) output.records.insert(output.records.end(), at_p.begin(), at_p.end());
  return output;
}

std::optional<double> pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) return std::nullopt;
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxy += (x[k] - mx) * (y[k] - my);
    sxx += (x[k] - mx) * (x[k] - mx);
    syy += (y[k] - my) * (y[k] - my);
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) return std::nullopt;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

Correlation correlate(const std::vector<SweepRecord>& records) {
  std::vector<double> x, y, lx, ly;
  for (const auto& r : records) {
    if (!r.ok() || !std::isfinite(r.df) || !std::isfinite(r.best_cost)) continue;
    x.push_back(r.df);
    y.push_back(r.best_cost);
    lx.push_back(log_floored(r.df));
    ly.push_back(log_floored(r.best_cost));
  }
  if (x.size() < 3) {
    throw ConfigError("correlation needs at least 3 successful records, got " + std::to_string(x.size()));
  }
  return {x.size(), pearson(lx, ly), pearson(x, y)};
}

Correlation correlate(const std::vector<SweepRecord>& records, int p) {
  std::vector<SweepRecord> at_p;
  std::copy_if(records.begin(), records.end(), std::back_inserter(at_p), [p](const SweepRecord& r) { return r.p == p; });
  return correlate(at_p);
}

Histogram Histogram::of(std::span<const double> values, double lo, double hi, int bins) {
  if (bins < 1) throw ConfigError("histogram needs at least one bin");
  if (!(hi > lo)) throw ConfigError("histogram range is empty");
  Histogram h{lo, hi, std::vector<long>(static_cast<std::size_t>(bins), 0)};
  for (double v : values) {
    const double t = std::floor((v - lo) / h.bin_width());
    const auto k = static_cast<std::size_t>(std::clamp(t, 0.0, static_cast<double>(bins - 1)));
    ++h.counts[k];
  }
  return h;
}

EpsilonDistribution epsilon_distribution(const PointSetup& setup, int layers, double hx, double hz,
                                         const DistributionConfig& config) {
  if (config.samples < 1) throw ConfigError("distribution.samples: must be positive");
  PointSetup energy_setup = setup;
  energy_setup.cost = CostKind::RelativeEnergy;
  const PreparedPoint point = prepare_point(energy_setup, hx, hz);
  const CostFunction cost = make_cost(energy_setup, point, layers);
  const auto n_params = static_cast<std::size_t>(cost.protocol().parameter_count());
  const Objective objective = [&cost](std::span<const double> x) { return cost(x); };

  EpsilonDistribution out;
  out.hx = hx;
  out.hz = hz;
  out.samples.resize(static_cast<std::size_t>(config.samples));
  parallel_for(out.samples.size(), config.threads, [&](std::size_t k) {
    std::mt19937_64 rng(derive_seed(config.seed, {k}));
    std::uniform_real_distribution<double> uniform(0.0, kPi);
    std::vector<double> x0(n_params);
    for (double& v : x0) v = uniform(rng);
    out.samples[k] = local_minimize(objective, x0, config.local).value;
  });
  std::vector<double> logs(out.samples.size());
  std::transform(out.samples.begin(), out.samples.end(), logs.begin(), log_floored);
  out.histogram = Histogram::of(logs, std::log10(kLogFloor), 0.0, config.bins);
  out.median_log10 = median(logs);
  out.zero_start = cost(std::vector<double>(n_params, 0.0));
  return out;
}

std::vector<LandscapeRow> landscape_scan(const PointSetup& setup, int layers,
                                         const std::vector<std::pair<double, double>>& points,
                                         const std::vector<double>& budgets, TimeConstraint mode,
                                         const BasinHopConfig& config, int threads) {
  for (std::size_t k = 0; k < budgets.size(); ++k) {
    if (!(budgets[k] > 0.0) || !std::isfinite(budgets[k])) throw ConfigError("landscape.T: values must be positive");
    if (k > 0 && !(budgets[k] > budgets[k - 1])) throw ConfigError("landscape.T: values must be ascending");
  }
  PointSetup energy_setup = setup;
  energy_setup.cost = CostKind::RelativeEnergy;
  std::vector<std::vector<LandscapeRow>> per_point(points.size());
  parallel_for(points.size(), threads, [&](std::size_t i) {
    const auto [hx, hz] = points[i];
    const PreparedPoint point = prepare_point(energy_setup, hx, hz);
    const CostFunction cost = make_cost(energy_setup, point, layers);
    const Objective objective = [&cost](std::span<const double> x) { return cost(x); };
    const auto n_params = static_cast<std::size_t>(cost.protocol().parameter_count());
    BasinHopConfig cfg = config;
    cfg.seed = derive_seed(config.seed, {i});
    std::vector<std::vector<double>> warm;
    for (double budget : budgets) {
      const OptResult r = constrained_basinhop(objective, n_params, mode, budget, cfg, warm);
      if (mode == TimeConstraint::AtMost) warm = {r.best_x};
      LandscapeRow row{hx, hz, mode, budget, r.best_cost, 0.0, r.best_x};
      row.total_time = std::accumulate(r.best_x.begin(), r.best_x.end(), 0.0);
      per_point[i].push_back(std::move(row));
    }
  });
  std::vector<LandscapeRow> rows;
  for (auto& v : per_point) rows.insert(rows.end(), v.begin(), v.end());
  return rows;
}

std::vector<EmbeddingSample> export_samples_for_embedding(const PointSetup& setup, int layers, double hx, double hz,
                                                          TimeConstraint mode, double budget, int count,
                                                          const LocalOptions& local, std::uint64_t seed,
                                                          const std::filesystem::path& path, int threads) {
  if (count < 0) throw ConfigError("export.count: must be non-negative");
  if (!(budget > 0.0) || !std::isfinite(budget)) throw ConfigError("export.T: must be positive");
  PointSetup energy_setup = setup;
  energy_setup.cost = CostKind::RelativeEnergy;
  const PreparedPoint point = prepare_point(energy_setup, hx, hz);
  const CostFunction cost = make_cost(energy_setup, point, layers);
  const Protocol& protocol = cost.protocol();
  const auto n_params = static_cast<std::size_t>(protocol.parameter_count());
  const Objective mapped = [&](std::span<const double> y) { return cost(constrained_angles(y, mode, budget)); };

  std::vector<EmbeddingSample> samples(static_cast<std::size_t>(count));
  parallel_for(samples.size(), threads, [&](std::size_t k) {
    std::mt19937_64 rng(derive_seed(seed, {k}));
    const auto x0 = random_constrained_start(n_params, mode, budget, rng);
    const LocalResult r = local_minimize(mapped, constrained_coordinates(x0, mode, budget), local);
    samples[k] = {constrained_angles(r.x, mode, budget), r.value};
  });

  auto out = open_output(path);
  out << "# family=" << to_string(setup.family) << " N=" << setup.n_spins << " p=" << layers
      << " protocol=" << protocol.name << " initial=" << describe(protocol.initial) << "\n";
  out << "# hx=" << format_double(hx) << " hz=" << format_double(hz) << " constraint=" << to_string(mode)
      << " T=" << format_double(budget) << " count=" << count << " seed=" << seed << "\n";
  out << "# columns: theta_<layer>_<generator> (generators";
  for (auto g : protocol.generators) out << " " << to_string(g);
  out << "), epsilon\n";
  for (int i = 1; i <= protocol.layers; ++i) {
    for (int j = 1; j <= protocol.generator_count(); ++j) out << "theta_" << i << "_" << j << "\t";
  }
  out << "epsilon\n";
  for (const auto& s : samples) {
    for (double a : s.angles) out << format_double(a) << "\t";
    out << format_double(s.epsilon) << "\n";
  }
  if (!out) throw IoError("failed writing " + path.string());
  return samples;
}

AngleHistogram angle_histogram(const std::vector<SweepRecord>& records, int generator, int bins, double delta) {
  if (generator < 0) throw ConfigError("histogram.generator: must be non-negative");
  std::vector<double> angles;
  for (const auto& r : records) {
    if (!r.ok()) continue;
    for (const auto& row : r.schedule) {
      if (static_cast<std::size_t>(generator) >= row.size()) {
        throw ConfigError("histogram.generator: record has only " + std::to_string(row.size()) + " generators");
      }
      angles.push_back(reduce_angle(row[static_cast<std::size_t>(generator)], kPi));
    }
  }
  AngleHistogram out;
  out.generator = generator;
  out.angles = angles.size();
  out.histogram = Histogram::of(angles, 0.0, kPi, bins);
  std::size_t near = 0;
  for (double a : angles) {
    const double d = std::fmod(a, kPi / 2);
    if (std::min(d, kPi / 2 - d) <= delta) ++near;
  }
  out.near_multiple_fraction = angles.empty() ? 0.0 : static_cast<double>(near) / static_cast<double>(angles.size());
  return out;
}

std::vector<std::pair<double, double>> critical_overlay(Family family) {
  switch (family) {
    case Family::FmIsing: return {{1.0, 0.0}};
    case Family::AfmIsing: return {{1.0, 0.0}, {0.0, 2.0}};
    case Family::ThreeSpin: return {{0.0, -3.0}, {1.0, 0.0}};
    case Family::Custom: return {};
  }
  return {};
}

}  // namespace qaoalab
