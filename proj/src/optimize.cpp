#include "qaoalab/optimize.hpp"

#include "qaoalab/errors.hpp"
#include "qaoalab/parallel.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>

namespace qaoalab {

namespace {

constexpr double kPi = std::numbers::pi;

}  // namespace

AngleSchedule random_schedule(const Protocol& protocol, std::mt19937_64& rng) {
  AngleSchedule s(protocol.layers, protocol.generator_count());
  for (int i = 0; i < s.layers(); ++i) {
    for (int j = 0; j < s.generators(); ++j) {
      const double domain = protocol.domain_length(j) > 0.0 ? protocol.domain_length(j) : kPi;
      s(i, j) = std::uniform_real_distribution<double>(0.0, domain)(rng);
    }
  }
  return s;
}

AngleSchedule snap_z_angles(const AngleSchedule& schedule, const Protocol& protocol) {
  AngleSchedule out = schedule;
  for (int j = 0; j < protocol.generator_count(); ++j) {
    if (protocol.generators[static_cast<std::size_t>(j)] != GeneratorLabel::Z) continue;
    for (int i = 0; i < out.layers(); ++i) {
      out(i, j) = reduce_angle(std::round(out(i, j) / (kPi / 2)) * (kPi / 2), kPi);
    }
  }
  return out;
}

ScheduleResult optimize_schedule(const CostFunction& cost, const AngleSchedule& start, const BasinHopConfig& config) {
  const Protocol& protocol = cost.protocol();
  if (start.layers() != protocol.layers || start.generators() != protocol.generator_count()) {
    throw ConfigError("start schedule shape does not match the protocol");
  }
  Objective objective = [&cost](std::span<const double> x) { return cost(x); };
  const std::vector<double> x0 = start.flat();
  OptResult opt = basinhop(objective, x0, config);
  AngleSchedule best = reduce_angles(AngleSchedule::from_flat(opt.best_x, protocol.layers, protocol.generator_count()),
                                     protocol);
  opt.best_x = best.flat();
  return {std::move(best), std::move(opt)};
}

AngleSchedule seed_from_previous_p(const AngleSchedule& optimum, const Protocol& protocol) {
  const int p = optimum.layers();
  const int m = optimum.generators();
  if (m != protocol.generator_count()) {
    throw ConfigError("schedule and protocol disagree on the generator count");
  }
  AngleSchedule next(p + 1, m);
  auto old = [&](int k, int j) { return (k < 0 || k >= p) ? 0.0 : optimum(k, j); };
  for (int j = 0; j < m; ++j) {
    for (int k = 0; k <= p; ++k) {
      next(k, j) = (static_cast<double>(k) / p) * old(k - 1, j) + (static_cast<double>(p - k) / p) * old(k, j);
      next(k, j) = reduce_angle(next(k, j), protocol.domain_length(j));
    }
  }
  return next;
}

CostFunction with_layers(const CostFunction& cost, int layers) {
  if (layers == cost.protocol().layers) return cost;
  Protocol protocol = cost.protocol();
  protocol.layers = layers;
  // Rebuilding keeps the shared model and target by copying them once.
  return CostFunction(std::move(protocol), cost.model(), cost.kind(), cost.target());
}

std::vector<ScheduleResult> optimize_sequential(const CostFunction& cost, const AngleSchedule& first_start,
                                                const SequentialOptions& options) {
  const int depth = cost.protocol().layers;
  std::vector<ScheduleResult> results;
  AngleSchedule start = first_start;
  for (int p = 1; p <= depth; ++p) {
    const CostFunction at_p = with_layers(cost, p);
    if (p > 1) start = seed_from_previous_p(results.back().schedule, at_p.protocol());
    if (options.snap_z_seeds) start = snap_z_angles(start, at_p.protocol());
    BasinHopConfig config = options.hopping;
    config.seed = derive_seed(options.hopping.seed, {static_cast<std::uint64_t>(p)});
    results.push_back(optimize_schedule(at_p, start, config));
  }
  return results;
}

OptResult refine_point(const std::vector<OptResult>& grid, GridShape shape, std::size_t index,
                       const Objective& objective, const BasinHopConfig& config) {
  if (grid.size() != shape.size() || index >= grid.size()) {
    throw ConfigError("grid result count does not match its shape");
  }
  const auto start = std::chrono::steady_clock::now();
  const int r = static_cast<int>(index) / shape.cols;
  const int c = static_cast<int>(index) % shape.cols;
  std::vector<std::size_t> candidates{index};
  const int dr[] = {-1, 1, 0, 0};
  const int dc[] = {0, 0, -1, 1};
  for (int k = 0; k < 4; ++k) {
    const int rr = r + dr[k];
    const int cc = c + dc[k];
    if (rr >= 0 && rr < shape.rows && cc >= 0 && cc < shape.cols) {
      candidates.push_back(static_cast<std::size_t>(rr * shape.cols + cc));
    }
  }
  OptResult best = grid[index];
  long evaluations = 0;
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    const auto& seed_point = grid[candidates[k]].best_x;
    if (seed_point.empty() || seed_point.size() != grid[index].best_x.size()) continue;
    BasinHopConfig cfg = config;
    cfg.seed = derive_seed(config.seed, {index, k});
    OptResult trial = basinhop(objective, seed_point, cfg);
    evaluations += trial.evaluations;
    if (trial.best_cost < best.best_cost) best = std::move(trial);
  }
  best.evaluations = evaluations;
  best.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return best;
}

std::vector<OptResult> refine_grid(const std::vector<OptResult>& grid, GridShape shape,
                                   const ObjectiveFactory& objectives, const BasinHopConfig& config, int threads) {
  if (grid.size() != shape.size()) {
    throw ConfigError("grid result count does not match its shape");
  }
  std::vector<OptResult> out(grid.size());
  parallel_for(grid.size(), threads, [&](std::size_t index) {
    out[index] = refine_point(grid, shape, index, objectives(index), config);
  });
  return out;
}

std::string_view to_string(TimeConstraint constraint) {
  return constraint == TimeConstraint::AtMost ? "<=" : "=";
}

TimeConstraint parse_time_constraint(std::string_view name) {
  if (name == "<=" || name == "le" || name == "at-most") return TimeConstraint::AtMost;
  if (name == "=" || name == "eq" || name == "exactly") return TimeConstraint::Exactly;
  throw ConfigError("unknown time constraint '" + std::string(name) + "'");
}

std::vector<double> constrained_angles(std::span<const double> y, TimeConstraint constraint, double budget) {
  std::vector<double> x(y.size());
  if (y.empty()) return x;
  const double n = static_cast<double>(y.size());
  if (constraint == TimeConstraint::AtMost) {
    const double bound = budget / n;
    for (std::size_t k = 0; k < y.size(); ++k) {
      const double s = std::sin(y[k]);
      x[k] = bound * s * s;
    }
    return x;
  }
  double total = 0.0;
  for (double v : y) total += v * v;
  for (std::size_t k = 0; k < y.size(); ++k) {
    x[k] = total > 0.0 ? budget * (y[k] * y[k]) / total : budget / n;
  }
  return x;
}

std::vector<double> constrained_coordinates(std::span<const double> x, TimeConstraint constraint, double budget) {
  std::vector<double> y(x.size());
  const double n = static_cast<double>(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (constraint == TimeConstraint::AtMost) {
      y[k] = std::asin(std::sqrt(std::clamp(x[k] / (budget / n), 0.0, 1.0)));
    } else {
      y[k] = std::sqrt(std::max(x[k], 0.0) / budget);
    }
  }
  return y;
}

std::vector<double> random_constrained_start(std::size_t n, TimeConstraint constraint, double budget,
                                             std::mt19937_64& rng) {
  const double hi = constraint == TimeConstraint::AtMost ? kPi / 2 : 1.0;
  std::uniform_real_distribution<double> uniform(0.0, hi);
  std::vector<double> y(n);
  for (double& v : y) v = uniform(rng);
  return constrained_angles(y, constraint, budget);
}

OptResult constrained_basinhop(const Objective& f, std::size_t n_params, TimeConstraint constraint, double budget,
                               const BasinHopConfig& config, const std::vector<std::vector<double>>& warm_starts) {
  if (!(budget > 0.0) || !std::isfinite(budget)) {
    throw ConfigError("total-time budget must be positive");
  }
  if (n_params == 0) throw ConfigError("no parameters to optimize");
  const auto start = std::chrono::steady_clock::now();
  Objective mapped = [&](std::span<const double> y) { return f(constrained_angles(y, constraint, budget)); };

  std::mt19937_64 rng(derive_seed(config.seed, {0xC0u}));
  std::vector<std::vector<double>> starts{random_constrained_start(n_params, constraint, budget, rng)};
  for (const auto& w : warm_starts) {
    if (w.size() != n_params) throw ConfigError("warm start has the wrong length");
    starts.push_back(w);
  }

  OptResult best;
  best.best_cost = std::numeric_limits<double>::infinity();
  long evaluations = 0;
  for (std::size_t s = 0; s < starts.size(); ++s) {
    BasinHopConfig cfg = config;
    cfg.seed = derive_seed(config.seed, {s});
    OptResult r = basinhop(mapped, constrained_coordinates(starts[s], constraint, budget), cfg);
    evaluations += r.evaluations;
    if (s == 0 || r.best_cost < best.best_cost) best = std::move(r);
  }
  best.best_x = constrained_angles(best.best_x, constraint, budget);
  best.evaluations = evaluations;
  best.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return best;
}

}  // namespace qaoalab
