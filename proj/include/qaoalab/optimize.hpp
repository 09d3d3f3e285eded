#pragma once

#include "qaoalab/basinhop.hpp"
#include "qaoalab/qaoa.hpp"

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string_view>
#include <vector>

namespace qaoalab {

struct ScheduleResult {
  AngleSchedule schedule;
  OptResult opt;
};

/// Uniform angles in [0, domain) per generator ([0, pi) for generators without a domain).
AngleSchedule random_schedule(const Protocol& protocol, std::mt19937_64& rng);

/// Sets every Z-generator angle to the nearest of {0, pi/2} (mod pi).
AngleSchedule snap_z_angles(const AngleSchedule& schedule, const Protocol& protocol);

/// Basin hopping over the flattened angles of `cost`'s protocol; the result is domain-reduced.
ScheduleResult optimize_schedule(const CostFunction& cost, const AngleSchedule& start, const BasinHopConfig& config);

/**
 * Initial guess at p+1 layers from an optimum at p layers, column by column:
 *   new_i = ((i-1)/p) old_{i-1} + ((p-i+1)/p) old_i,  i = 1..p+1,  old_0 = old_{p+1} = 0,
 * then reduced into each generator's domain.
 */
AngleSchedule seed_from_previous_p(const AngleSchedule& optimum, const Protocol& protocol);

struct SequentialOptions {
  BasinHopConfig hopping;
  bool snap_z_seeds = false;
};

/// Optimizes p = 1, 2, ..., protocol.layers in turn, seeding each depth from the
/// previous optimum. Returns one result per depth.
std::vector<ScheduleResult> optimize_sequential(const CostFunction& cost, const AngleSchedule& first_start,
                                                const SequentialOptions& options);

/// A copy of `cost` whose protocol has `layers` layers.
CostFunction with_layers(const CostFunction& cost, int layers);

struct GridShape {
  int rows = 0;
  int cols = 0;
  std::size_t size() const { return static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols); }
};

using ObjectiveFactory = std::function<Objective(std::size_t index)>;

/**
 * One refinement round over a row-major grid of completed optimizations: every point
 * re-runs basin hopping from its own optimum and from each of its (up to four)
 * neighbours' optima and keeps the lowest cost. Costs never increase.
 * Seeds derive from (config.seed, index, candidate).
 */
std::vector<OptResult> refine_grid(const std::vector<OptResult>& grid, GridShape shape,
                                   const ObjectiveFactory& objectives, const BasinHopConfig& config, int threads = 1);

/// The refinement of a single grid point; refine_grid applies this to every index.
/// Points with an empty best_x (failed) are neither refined nor used as seeds.
OptResult refine_point(const std::vector<OptResult>& grid, GridShape shape, std::size_t index,
                       const Objective& objective, const BasinHopConfig& config);

enum class TimeConstraint { AtMost, Exactly };

std::string_view to_string(TimeConstraint constraint);
/// "<=" / "le" / "at-most" or "=" / "eq" / "exactly".
TimeConstraint parse_time_constraint(std::string_view name);

/// Angles from unconstrained coordinates: AtMost uses theta = (T/n) sin^2(y); Exactly uses
/// theta = T w / sum(w) with w = y^2 (uniform when all y vanish).
std::vector<double> constrained_angles(std::span<const double> y, TimeConstraint constraint, double budget);
/// A coordinate vector that maps back onto the feasible angles `x`.
std::vector<double> constrained_coordinates(std::span<const double> x, TimeConstraint constraint, double budget);

/// Draws a random feasible point (uniform coordinates).
std::vector<double> random_constrained_start(std::size_t n, TimeConstraint constraint, double budget,
                                             std::mt19937_64& rng);

/**
 * Basin hopping subject to a total-time constraint on the (non-negative) angles.
 * Runs from a random feasible start and from every warm start (which must already be
 * feasible for this constraint) and keeps the best. best_x holds angles satisfying the
 * constraint.
 */
OptResult constrained_basinhop(const Objective& f, std::size_t n_params, TimeConstraint constraint, double budget,
                               const BasinHopConfig& config, const std::vector<std::vector<double>>& warm_starts = {});

}  // namespace qaoalab
