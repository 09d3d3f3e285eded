#include "qaoalab/basinhop.hpp"

#include "qaoalab/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

namespace qaoalab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double safe_eval(const Objective& f, std::span<const double> x, long& evaluations) {
  ++evaluations;
  const double v = f(x);
  return std::isfinite(v) ? v : kInf;
}

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

struct SimplexRun {
  std::vector<double> x;
  double value;
  int iterations;
};

SimplexRun simplex_pass(const Objective& f, const std::vector<double>& start, double start_value,
                        const LocalOptions& opt, int iteration_budget, long& evaluations) {
  const std::size_t n = start.size();
  const double dn = static_cast<double>(n);
  // Adaptive coefficients for n >= 2 reduce to the standard ones at n = 2.
  const double alpha = 1.0;
  const double beta = n >= 2 ? 1.0 + 2.0 / dn : 2.0;
  const double gamma = n >= 2 ? 0.75 - 1.0 / (2.0 * dn) : 0.5;
  const double delta = n >= 2 ? 1.0 - 1.0 / dn : 0.5;
  const double xtol = opt.tolerance;

  std::vector<std::vector<double>> pts(n + 1, start);
  std::vector<double> vals(n + 1, start_value);
  for (std::size_t i = 0; i < n; ++i) {
    pts[i + 1][i] += opt.initial_step;
    vals[i + 1] = safe_eval(f, pts[i + 1], evaluations);
  }

  std::vector<std::size_t> order(n + 1);
  std::vector<double> centroid(n), xr(n), xe(n), xc(n);
  int it = 0;
  for (; it < iteration_budget; ++it) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
    const std::size_t best = order.front();
    const std::size_t worst = order.back();
    const std::size_t second = order[n - 1];

    double fspread = 0.0;
    double xspread = 0.0;
    for (std::size_t k = 0; k <= n; ++k) {
      if (k == best) continue;
      fspread = std::max(fspread, std::abs(vals[k] - vals[best]));
      for (std::size_t d = 0; d < n; ++d) xspread = std::max(xspread, std::abs(pts[k][d] - pts[best][d]));
    }
    if (std::isfinite(vals[best]) && fspread <= opt.tolerance && xspread <= xtol) break;

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t k = 0; k <= n; ++k) {
      if (k == worst) continue;
      for (std::size_t d = 0; d < n; ++d) centroid[d] += pts[k][d] / dn;
    }
    for (std::size_t d = 0; d < n; ++d) xr[d] = centroid[d] + alpha * (centroid[d] - pts[worst][d]);
    const double fr = safe_eval(f, xr, evaluations);

    if (fr < vals[best]) {
      for (std::size_t d = 0; d < n; ++d) xe[d] = centroid[d] + beta * (xr[d] - centroid[d]);
      const double fe = safe_eval(f, xe, evaluations);
      if (fe < fr) {
        pts[worst] = xe;
        vals[worst] = fe;
      } else {
        pts[worst] = xr;
        vals[worst] = fr;
      }
      continue;
    }
    if (fr < vals[second]) {
      pts[worst] = xr;
      vals[worst] = fr;
      continue;
    }
    const bool outside = fr < vals[worst];
    for (std::size_t d = 0; d < n; ++d) {
      xc[d] = outside ? centroid[d] + gamma * (xr[d] - centroid[d]) : centroid[d] - gamma * (centroid[d] - pts[worst][d]);
    }
    const double fc = safe_eval(f, xc, evaluations);
    if (fc < (outside ? fr : vals[worst])) {
      pts[worst] = xc;
      vals[worst] = fc;
      continue;
    }
    for (std::size_t k = 0; k <= n; ++k) {
      if (k == best) continue;
      for (std::size_t d = 0; d < n; ++d) pts[k][d] = pts[best][d] + delta * (pts[k][d] - pts[best][d]);
      vals[k] = safe_eval(f, pts[k], evaluations);
    }
  }
  const auto best = static_cast<std::size_t>(std::min_element(vals.begin(), vals.end()) - vals.begin());
  return {pts[best], vals[best], it};
}

}  // namespace

std::string_view to_string(LocalMethod method) {
  return method == LocalMethod::NelderMead ? "nelder-mead" : "bfgs-fd";
}

LocalMethod parse_local_method(std::string_view name) {
  if (name == "nelder-mead") return LocalMethod::NelderMead;
  if (name == "bfgs-fd") return LocalMethod::BfgsFiniteDifference;
  throw ConfigError("unknown local minimizer '" + std::string(name) + "'");
}

LocalResult nelder_mead(const Objective& f, std::span<const double> x0, const LocalOptions& options) {
  LocalResult out;
  out.x.assign(x0.begin(), x0.end());
  out.value = safe_eval(f, out.x, out.evaluations);
  if (out.x.empty()) return out;

  int budget = options.max_iterations;
  while (budget > 0) {
    SimplexRun run = simplex_pass(f, out.x, out.value, options, budget, out.evaluations);
    budget -= std::max(run.iterations, 1);
    const double improvement = out.value - run.value;
    if (run.value <= out.value) {
      out.x = std::move(run.x);
      out.value = run.value;
    }
    // A fresh simplex that cannot improve means the collapsed one was not stuck.
    if (!(improvement > options.tolerance)) break;
  }
  return out;
}

LocalResult bfgs_fd(const Objective& f, std::span<const double> x0, const LocalOptions& options) {
  const auto n = static_cast<Eigen::Index>(x0.size());
  LocalResult out;
  Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(x0.data(), n);
  auto eval = [&](const Eigen::VectorXd& v) {
    return safe_eval(f, std::span<const double>(v.data(), static_cast<std::size_t>(v.size())), out.evaluations);
  };
  auto gradient = [&](const Eigen::VectorXd& v) {
    Eigen::VectorXd g(n);
    Eigen::VectorXd probe = v;
    for (Eigen::Index i = 0; i < n; ++i) {
      probe[i] = v[i] + options.fd_step;
      const double up = eval(probe);
      probe[i] = v[i] - options.fd_step;
      const double down = eval(probe);
      probe[i] = v[i];
      g[i] = (up - down) / (2.0 * options.fd_step);
    }
    return g;
  };

  double fx = eval(x);
  if (n == 0 || !std::isfinite(fx)) {
    out.x.assign(x.data(), x.data() + n);
    out.value = fx;
    return out;
  }
  Eigen::VectorXd g = gradient(x);
  Eigen::MatrixXd inv_h = Eigen::MatrixXd::Identity(n, n);
  for (int it = 0; it < options.max_iterations; ++it) {
    if (!g.allFinite() || g.lpNorm<Eigen::Infinity>() < 1e-12) break;
    Eigen::VectorXd dir = -inv_h * g;
    double slope = g.dot(dir);
    if (!(slope < 0.0)) {
      inv_h.setIdentity();
      dir = -g;
      slope = -g.squaredNorm();
    }
    double step = 1.0;
    Eigen::VectorXd trial;
    double ft = kInf;
    bool accepted = false;
    for (int k = 0; k < 50; ++k) {
      trial = x + step * dir;
      ft = eval(trial);
      if (ft <= fx + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
    const Eigen::VectorXd s = trial - x;
    const Eigen::VectorXd g_new = gradient(trial);
    const Eigen::VectorXd y = g_new - g;
    const double decrease = fx - ft;
    x = trial;
    fx = ft;
    g = g_new;
    const double sy = s.dot(y);
    if (sy > 1e-14) {
      const double rho = 1.0 / sy;
      const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
      inv_h = (id - rho * s * y.transpose()) * inv_h * (id - rho * y * s.transpose()) + rho * s * s.transpose();
    }
    // Relative test so that objectives converging to zero keep refining.
    if (decrease <= options.tolerance * std::abs(fx) + 1e-15) break;
  }
  out.x.assign(x.data(), x.data() + n);
  out.value = fx;
  return out;
}

LocalResult local_minimize(const Objective& f, std::span<const double> x0, const LocalOptions& options) {
  return options.method == LocalMethod::NelderMead ? nelder_mead(f, x0, options) : bfgs_fd(f, x0, options);
}

void BasinHopConfig::validate() const {
  if (hops < 0) throw ConfigError("hop count must be non-negative");
  if (!(step_size > 0.0)) throw ConfigError("step size must be positive");
  if (!(temperature > 0.0)) throw ConfigError("temperature must be positive");
  if (!(local.tolerance > 0.0)) throw ConfigError("local tolerance must be positive");
  if (local.max_iterations < 1) throw ConfigError("max local iterations must be positive");
  if (!(local.initial_step > 0.0)) throw ConfigError("initial simplex step must be positive");
}

OptResult basinhop(const Objective& f, std::span<const double> x0, const BasinHopConfig& config) {
  config.validate();
  for (double v : x0) {
    if (!std::isfinite(v)) throw ConfigError("basinhop start point must be finite");
  }
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> jitter(-config.step_size, config.step_size);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  OptResult out;
  LocalResult current = local_minimize(f, x0, config.local);
  out.evaluations += current.evaluations;
  out.trace.push_back(current.value);
  out.best_x = current.x;
  out.best_cost = current.value;

  std::vector<double> trial(x0.size());
  for (int hop = 0; hop < config.hops; ++hop) {
    for (std::size_t d = 0; d < trial.size(); ++d) trial[d] = current.x[d] + jitter(rng);
    LocalResult candidate = local_minimize(f, trial, config.local);
    out.evaluations += candidate.evaluations;
    out.trace.push_back(candidate.value);
    // Draw unconditionally so the random stream does not depend on objective values.
    const double u = unit(rng);
    if (!std::isfinite(candidate.value)) continue;
    if (candidate.value < out.best_cost) {
      out.best_cost = candidate.value;
      out.best_x = candidate.x;
    }
    const double delta = candidate.value - current.value;
    if (delta < 0.0 || u < std::exp(-delta / config.temperature)) {
      current = std::move(candidate);
    }
  }
  out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> stream) {
  std::uint64_t state = master;
  std::uint64_t out = splitmix64(state);
  for (std::uint64_t s : stream) {
    state ^= s + 0x632BE59BD9B4E019ull + (out << 6) + (out >> 2);
    out = splitmix64(state);
  }
  return out;
}

}  // namespace qaoalab
