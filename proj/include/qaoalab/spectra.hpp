#pragma once

#include "qaoalab/basinhop.hpp"
#include "qaoalab/state.hpp"

#include <filesystem>
#include <span>
#include <vector>

namespace qaoalab {

/// Descending-sorted, normalized probabilities.
class ProbabilitySpectrum {
 public:
  ProbabilitySpectrum() = default;

  /// Sorts, clamps round-off negatives (>= -1e-12) to zero and normalizes.
  /// Throws NumericError for negative, non-finite or all-zero input.
  static ProbabilitySpectrum from_values(std::vector<double> values);

  const std::vector<double>& values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t k) const { return values_[k]; }

 private:
  explicit ProbabilitySpectrum(std::vector<double> sorted) : values_(std::move(sorted)) {}
  std::vector<double> values_;
};

/// Squared Schmidt coefficients for the cut {0, ..., cut-1} | {cut, ..., N-1}.
/// Length is min(2^cut, 2^(N-cut)).
ProbabilitySpectrum entanglement_spectrum(const StateVector& state, int cut);

/// -sum p ln p with 0 ln 0 = 0.
double von_neumann_entropy(const ProbabilitySpectrum& spectrum);

/// Energies are clamped to this magnitude before exponentiation.
inline constexpr double kEnergyClamp = 700.0;

/// Spectrum of exp(-sum_j e_j n_j) / Z over all occupation patterns n in {0,1}^modes.
ProbabilitySpectrum gaussian_spectrum(std::span<const double> energies);

/// 1/2 sum |p_k - q_k| of two descending spectra, the shorter padded with zeros.
double trace_distance(const ProbabilitySpectrum& p, const ProbabilitySpectrum& q);

/// 3 - 2 sqrt(2), the conjectured maximum of the interaction distance.
double conjectured_df_bound();

struct DistanceConfig {
  int random_starts = 16;
  double random_range = 10.0;
  BasinHopConfig hopping{.hops = 10, .step_size = 1.0, .temperature = 1.0,
                         .local = {.tolerance = 1e-12, .max_iterations = 4000, .initial_step = 0.5}, .seed = 0};
};

struct InteractionDistance {
  double distance = 0.0;
  std::vector<double> energies;
  /// Distance of the entanglement-energy seed before optimization.
  double seed_distance = 0.0;
  bool exceeds_conjectured_bound = false;
};

/// Entanglement energies xi_{j+1} - xi_1 (xi_k = -ln rho_k, clamped) used as a starting guess.
std::vector<double> entanglement_energy_seed(const ProbabilitySpectrum& spectrum, int modes);

/// Minimizes the trace distance between `spectrum` and gaussian_spectrum(e) over e in R^modes.
InteractionDistance interaction_distance(const ProbabilitySpectrum& spectrum, int modes,
                                         const DistanceConfig& config = {});

/// Plain text, one probability per line; blank lines and lines starting with '#' are ignored.
ProbabilitySpectrum read_spectrum(const std::filesystem::path& path);
void write_spectrum(const ProbabilitySpectrum& spectrum, const std::filesystem::path& path);

}  // namespace qaoalab
