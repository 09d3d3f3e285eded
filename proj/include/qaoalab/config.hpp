#pragma once

#include "qaoalab/experiments.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace qaoalab {

/**
 * Run configuration. The file is JSON (comments allowed); every block and field is
 * optional except `seed`, unknown keys are rejected, and to_json() reproduces the fully
 * resolved configuration so a run can be repeated from its effective_config.json alone.
 *
 *   {
 *     "seed": 7,
 *     "model":     {"family": "fm", "N": 6, "hx": 1.0, "hz": 0.0, "degeneracy_tolerance": 1e-9,
 *                   "degenerate_choice": "symmetric", "cut": null},
 *     "grid":      {"hx": {"min": 0, "max": 2, "count": 32, "include_min": false, "include_max": true},
 *                   "hz": {...}, "extra_hz": [0.0]},
 *     "protocol":  {"name": "ising3", "p": 3, "initial": "auto", "magnetization": null},
 *     "cost": "infidelity", "fidelity_target": "projector",
 *     "optimizer": {"hops": 50, "step_size": 0.3, "temperature": 1.0, "local": "nelder-mead",
 *                   "tolerance": 1e-10, "max_iterations": 2000, "initial_step": 0.1, "fd_step": 1e-6,
 *                   "refine_rounds": 2, "refine_hops": 10, "snap_z_seeds": false},
 *     "distance":  {"random_starts": 16, "random_range": 10, "hops": 10},
 *     "landscape": {"points": [[1, 1]], "T": [0.5, 1, 2], "mode": "<="},
 *     "distribution": {"points": [[0.1, 0.1], [1, 1]], "samples": 1000, "bins": 48},
 *     "export":    {"hx": 1, "hz": 1, "T": 1, "mode": "=", "count": 500},
 *     "histogram": {"records": null, "bins": 36, "delta": 0.2},
 *     "correlate": {"records": null},
 *     "experiment": "sweep", "output": "qaoalab-out", "threads": null
 *   }
 */
struct RunConfig {
  std::uint64_t seed = 0;
  bool seed_given = false;

  Family family = Family::FmIsing;
  int n_spins = 6;
  double hx = 1.0;
  double hz = 0.0;
  double degeneracy_tolerance = kDefaultDegeneracyTolerance;
  DegenerateChoice degenerate = DegenerateChoice::Symmetric;
  std::optional<int> cut;

  /// Unset axes follow the family defaults when resolved.
  std::optional<GridAxis> grid_hx;
  std::optional<GridAxis> grid_hz;
  int grid_count = 32;
  std::vector<double> extra_hz;

  std::string protocol = "ising3";
  int layers = 3;
  /// "auto", "x+", "x-" or "sector".
  std::string initial = "auto";
  std::optional<int> magnetization;
  CostKind cost = CostKind::Infidelity;
  FidelityMode fidelity = FidelityMode::Projector;

  BasinHopConfig hopping;
  int refine_rounds = 2;
  int refine_hops = 10;
  bool snap_z_seeds = false;
  DistanceConfig distance;

  std::vector<std::pair<double, double>> landscape_points{{0.1, 0.1}, {0.1, 2.0}, {1.0, 1.0}, {2.0, 0.1}, {2.0, 2.0}};
  std::vector<double> landscape_budgets{0.5, 1.0, 2.0, 4.0, 8.0};
  TimeConstraint landscape_mode = TimeConstraint::AtMost;

  std::vector<std::pair<double, double>> distribution_points{{0.1, 0.1}, {1.0, 1.0}};
  int distribution_samples = 1000;
  int distribution_bins = 48;

  double export_hx = 1.0;
  double export_hz = 1.0;
  double export_budget = 1.0;
  TimeConstraint export_mode = TimeConstraint::Exactly;
  int export_count = 500;

  std::optional<std::string> records;
  int histogram_bins = 36;
  double histogram_delta = 0.2;

  std::string experiment = "sweep";
  std::string output = "qaoalab-out";
  std::optional<int> threads;

  GridSpec grid() const;
  PointSetup point_setup() const;
  SweepConfig sweep_config(int threads) const;

  /// Cross-field checks; throws ConfigError naming the offending field.
  void validate() const;
};

/// Strict parse; throws ConfigError for unknown keys, wrong types or invalid values.
RunConfig parse_config(const nlohmann::json& j, bool require_seed = true);
/// Reads and parses a config file; a missing file is reported as ConfigError.
RunConfig load_config(const std::filesystem::path& path);

nlohmann::json to_json(const RunConfig& config);

inline const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{"sweep", "qaoa", "df", "landscape", "distribution",
                                              "correlate", "histogram", "export-samples"};
  return names;
}

}  // namespace qaoalab
