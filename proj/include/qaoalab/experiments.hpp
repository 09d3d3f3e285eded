#pragma once

#include "qaoalab/optimize.hpp"
#include "qaoalab/qaoa.hpp"
#include "qaoalab/spectra.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace qaoalab {

/// Uniform points on [lo, hi]; an excluded end is dropped and the count kept, so
/// (0, 2] with 8 points gives 0.25, 0.5, ..., 2.
struct GridAxis {
  double lo = 0.0;
  double hi = 2.0;
  int count = 32;
  bool include_lo = false;
  bool include_hi = true;

  std::vector<double> values() const;
  void validate(const std::string& name) const;
};

struct GridSpec {
  GridAxis hx;
  GridAxis hz;
  /// Extra h_z rows merged into the grid (e.g. an h_z = 0 control row).
  std::vector<double> extra_hz;

  /// (0,2] x (0,2] for the Ising families, (0,2] x [-3,0) for the three-spin model.
  static GridSpec defaults_for(Family family, int count = 32);

  std::vector<double> hx_values() const;
  /// Ascending grid rows, extra rows included, duplicates removed.
  std::vector<double> hz_values() const;
};

enum class FidelityMode { Projector, Representative };
std::string_view to_string(FidelityMode mode);
FidelityMode parse_fidelity_mode(std::string_view name);

/// Everything needed to evaluate one phase-diagram point.
struct PointSetup {
  Family family = Family::FmIsing;
  int n_spins = 6;
  std::string protocol = "ising3";
  /// Unset means the protocol's default initial state.
  std::optional<InitialState> initial;
  CostKind cost = CostKind::Infidelity;
  FidelityMode fidelity = FidelityMode::Projector;
  DegenerateChoice degenerate = DegenerateChoice::Symmetric;
  double degeneracy_tolerance = kDefaultDegeneracyTolerance;
  /// Unset means floor(N/2).
  std::optional<int> cut;

  int effective_cut() const { return cut ? *cut : n_spins / 2; }
  Protocol protocol_for(int layers) const;
};

/// Ground-state data and a ready-to-use cost function for one (h_x, h_z).
struct PreparedPoint {
  SpinChainModel model;
  ExactSolution exact;
  StateVector representative;
  ProbabilitySpectrum spectrum;
  CostTarget target;
};

PreparedPoint prepare_point(const PointSetup& setup, double hx, double hz);
CostFunction make_cost(const PointSetup& setup, const PreparedPoint& point, int layers);

struct SweepRecord {
  std::string family;
  int n_spins = 0;
  int p = 0;
  double hx = 0.0;
  double hz = 0.0;
  int row = 0;
  int col = 0;
  std::string protocol;
  std::string initial;
  std::string cost_kind;
  /// "initial", then "refine1", "refine2", ...
  std::string stage;
  double best_cost = 0.0;
  std::vector<std::vector<double>> schedule;  // p x M
  std::optional<double> infidelity;
  std::optional<double> relative_energy;
  /// Infidelity after snapping the Z-generator angles to multiples of pi/2.
  std::optional<double> snapped_infidelity;
  double df = 0.0;
  bool df_exceeds_bound = false;
  double vne = 0.0;
  double e_min = 0.0;
  double e_max = 0.0;
  int degeneracy = 1;
  std::uint64_t seed = 0;
  long evaluations = 0;
  double wall_seconds = 0.0;
  /// Set when the point failed; numeric fields are then meaningless.
  std::optional<std::string> error;

  bool ok() const { return !error.has_value(); }
};

struct SweepConfig {
  PointSetup setup;
  int layers = 3;
  GridSpec grid;
  BasinHopConfig hopping;
  bool snap_z_seeds = false;
  int refine_rounds = 2;
  int refine_hops = 10;
  DistanceConfig distance;
  std::uint64_t seed = 0;
  int threads = 1;
};

struct SweepOutput {
  /// The last stage of every (p, point), ordered by p, then row, then column.
  std::vector<SweepRecord> records;
  /// Every record of every stage, in the same order within each stage.
  std::vector<SweepRecord> history;
  GridShape shape;
  std::vector<double> hx_values;
  std::vector<double> hz_values;
};

/// Called with each finished point (one line of progress).
using RecordSink = std::function<void(const SweepRecord&)>;

/**
 * Phase-diagram sweep: exact ground data and D_F per point, sequential-in-p optimization,
 * then `refine_rounds` neighbour-seeded rounds at every depth. With a ledger path every
 * record is appended as it completes, and records already present in the ledger are
 * reused instead of recomputed.
 */
SweepOutput sweep(const SweepConfig& config, const std::optional<std::filesystem::path>& ledger = std::nullopt,
                  const RecordSink& on_record = {});

struct Correlation {
  std::size_t count = 0;
  /// Pearson r of log10 values floored at 1e-12; empty when a variance vanishes.
  std::optional<double> log_r;
  std::optional<double> raw_r;
};

inline constexpr double kLogFloor = 1e-12;

std::optional<double> pearson(std::span<const double> x, std::span<const double> y);

/// Matched-point correlation of D_F (x) against best cost (y) over the successful records.
/// Throws ConfigError with fewer than three usable records.
Correlation correlate(const std::vector<SweepRecord>& records);
/// Same, restricted to records at depth p.
Correlation correlate(const std::vector<SweepRecord>& records, int p);

struct Histogram {
  double lo = 0.0;
  double hi = 1.0;
  std::vector<long> counts;

  double bin_width() const { return (hi - lo) / static_cast<double>(counts.size()); }
  /// Values outside [lo, hi) land in the first or last bin.
  static Histogram of(std::span<const double> values, double lo, double hi, int bins);
};

struct DistributionConfig {
  int samples = 1000;
  int bins = 48;
  LocalOptions local;
  std::uint64_t seed = 0;
  int threads = 1;
};

struct EpsilonDistribution {
  double hx = 0.0;
  double hz = 0.0;
  /// Relative energy after one local minimization per random start.
  std::vector<double> samples;
  /// Over log10(max(eps, 1e-12)) on [-12, 0].
  Histogram histogram;
  double median_log10 = 0.0;
  /// Relative energy of the all-zero schedule, i.e. of the initial state.
  double zero_start = 0.0;
};

/// Local minimizations of the relative energy from uniform [0, pi) starts.
EpsilonDistribution epsilon_distribution(const PointSetup& setup, int layers, double hx, double hz,
                                         const DistributionConfig& config);

struct LandscapeRow {
  double hx = 0.0;
  double hz = 0.0;
  TimeConstraint mode = TimeConstraint::AtMost;
  double budget = 0.0;
  double epsilon = 0.0;
  double total_time = 0.0;
  std::vector<double> angles;
};

/**
 * Best relative energy under a total-time constraint for each point and budget. Budgets
 * must be positive and ascending. Under AtMost every budget is warm-started from the
 * previous budget's optimum (still feasible), so eps is non-increasing in T; under
 * Exactly every budget uses the same seed and no warm start.
 */
std::vector<LandscapeRow> landscape_scan(const PointSetup& setup, int layers,
                                         const std::vector<std::pair<double, double>>& points,
                                         const std::vector<double>& budgets, TimeConstraint mode,
                                         const BasinHopConfig& config, int threads = 1);

struct EmbeddingSample {
  std::vector<double> angles;
  double epsilon = 0.0;
};

/// Random feasible starts under the constraint, each locally minimized; angles and eps
/// are written one row per sample to `path` behind a '#' metadata header.
std::vector<EmbeddingSample> export_samples_for_embedding(const PointSetup& setup, int layers, double hx, double hz,
                                                          TimeConstraint mode, double budget, int count,
                                                          const LocalOptions& local, std::uint64_t seed,
                                                          const std::filesystem::path& path, int threads = 1);

struct AngleHistogram {
  int generator = 0;
  Histogram histogram;
  std::size_t angles = 0;
  /// Share of angles within `delta` of a multiple of pi/2 (circularly on [0, pi)).
  double near_multiple_fraction = 0.0;
};

/// Histogram over [0, pi) of column `generator` of every successful record's schedule.
AngleHistogram angle_histogram(const std::vector<SweepRecord>& records, int generator, int bins = 36,
                               double delta = 0.2);

/// Points on the known critical lines, in (h_x, h_z); empty when none apply.
std::vector<std::pair<double, double>> critical_overlay(Family family);

}  // namespace qaoalab
