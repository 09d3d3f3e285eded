#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

namespace qaoalab {

using Objective = std::function<double(std::span<const double>)>;

enum class LocalMethod { NelderMead, BfgsFiniteDifference };

std::string_view to_string(LocalMethod method);
LocalMethod parse_local_method(std::string_view name);

struct LocalOptions {
  LocalMethod method = LocalMethod::NelderMead;
  double tolerance = 1e-10;
  int max_iterations = 2000;
  /// Edge length of the initial Nelder-Mead simplex.
  double initial_step = 0.1;
  /// Central-difference step for the BFGS gradient.
  double fd_step = 1e-6;
};

struct LocalResult {
  std::vector<double> x;
  double value = 0.0;
  long evaluations = 0;
};

/// Adaptive Nelder-Mead (dimension-dependent coefficients). Non-finite objective
/// values are treated as +infinity. Restarts from the best vertex until a restart
/// stops improving or the iteration budget is spent.
LocalResult nelder_mead(const Objective& f, std::span<const double> x0, const LocalOptions& options);

/// BFGS with central finite-difference gradients and backtracking line search.
LocalResult bfgs_fd(const Objective& f, std::span<const double> x0, const LocalOptions& options);

LocalResult local_minimize(const Objective& f, std::span<const double> x0, const LocalOptions& options);

struct BasinHopConfig {
  int hops = 50;
  double step_size = 0.3;
  double temperature = 1.0;
  LocalOptions local;
  std::uint64_t seed = 0;

  /// Throws ConfigError on non-positive step, temperature or tolerance.
  void validate() const;
};

struct OptResult {
  std::vector<double> best_x;
  double best_cost = 0.0;
  /// Local-minimum value found by the initial minimization (entry 0) and by every hop.
  std::vector<double> trace;
  long evaluations = 0;
  double wall_seconds = 0.0;
};

/**
 * Basin hopping with Metropolis acceptance.
 *
 * The start point is locally minimized; each hop perturbs the currently accepted
 * minimum by independent uniform noise in [-step, step] per coordinate, minimizes
 * locally, and accepts the new minimum if it is lower or with probability
 * exp(-delta / temperature). A hop whose local minimum is not finite is rejected.
 * The best minimum ever seen is returned. Deterministic for a given seed.
 */
OptResult basinhop(const Objective& f, std::span<const double> x0, const BasinHopConfig& config);

/// Mixes a master seed with stream identifiers into an independent 64-bit seed.
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> stream);

}  // namespace qaoalab
