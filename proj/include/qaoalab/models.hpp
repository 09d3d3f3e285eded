#pragma once

#include "qaoalab/state.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace qaoalab {

enum class Axis : std::uint8_t { X, Y, Z };

struct PauliFactor {
  int site = 0;
  Axis axis = Axis::Z;
};

/// coefficient * (product of single-site Paulis). No factors means a multiple of identity.
struct PauliTerm {
  double coefficient = 0.0;
  std::vector<PauliFactor> factors;
};

/// Bit masks describing how a Pauli string acts on a computational basis state:
/// P|b> = i^{y_count} (-1)^{popcount(b & phase_mask)} |b ^ flip_mask>.
struct PauliMasks {
  std::uint64_t flip_mask = 0;
  std::uint64_t phase_mask = 0;
  int y_count = 0;
};

PauliMasks masks_of(const PauliTerm& term);

enum class Family { FmIsing, AfmIsing, ThreeSpin, Custom };

std::string_view to_string(Family family);
/// Accepts "fm", "afm", "threespin" (and the long forms "fm-ising", "afm-ising", "three-spin").
Family parse_family(std::string_view name);

/// Periodic spin chain Hamiltonian held as a list of Pauli strings.
struct SpinChainModel {
  int n_spins = 0;
  std::vector<PauliTerm> terms;
  Family family = Family::Custom;
  double hx = 0.0;
  double hz = 0.0;
  bool periodic = true;

  /// True when every term has an even number of Y factors, i.e. the matrix is real.
  bool is_real() const;
};

/// Smallest chain accepted for a family (2 for Ising, 3 for the three-spin model).
int minimum_spins(Family family);

/// H = -sum (+-1) Z_i Z_{i+1} - hx sum X_i - hz sum Z_i for the Ising families and
/// H = -sum Z_i Z_{i+1} Z_{i+2} - hx sum X_i - hz sum Z_i for ThreeSpin, sites mod N.
SpinChainModel build_model(Family family, int n_spins, double hx, double hz);

/// Validates and wraps an arbitrary term list.
SpinChainModel custom_model(int n_spins, std::vector<PauliTerm> terms);

inline constexpr int kDefaultDenseCap = 14;

Eigen::MatrixXcd to_dense(const SpinChainModel& model, int max_spins = kDefaultDenseCap);
/// Real-valued dense matrix; throws ConfigError for models with complex entries.
Eigen::MatrixXd to_dense_real(const SpinChainModel& model, int max_spins = kDefaultDenseCap);

/// H|psi> evaluated term by term without forming a matrix.
Eigen::VectorXcd apply_model(const SpinChainModel& model, const Eigen::VectorXcd& amplitudes);

inline constexpr double kDefaultDegeneracyTolerance = 1e-9;

struct GroundSpace {
  double energy = 0.0;
  std::vector<StateVector> basis;
  double tolerance = kDefaultDegeneracyTolerance;

  int degeneracy() const { return static_cast<int>(basis.size()); }
  int n_spins() const { return basis.front().n_spins(); }
};

/// Everything a phase-diagram point needs from one dense eigensolve.
struct ExactSolution {
  GroundSpace ground;
  double e_min = 0.0;
  double e_max = 0.0;
};

ExactSolution solve_exact(const SpinChainModel& model, double tolerance = kDefaultDegeneracyTolerance,
                          int max_spins = kDefaultDenseCap);

GroundSpace ground_space(const SpinChainModel& model, double tolerance = kDefaultDegeneracyTolerance,
                         int max_spins = kDefaultDenseCap);

struct EnergyRange {
  double e_min = 0.0;
  double e_max = 0.0;
};

EnergyRange extremal_energies(const SpinChainModel& model, int max_spins = kDefaultDenseCap);

/// How a single target vector is picked out of a degenerate ground space.
enum class DegenerateChoice {
  Symmetric,  ///< the combination with translation eigenvalue closest to 1 (zero momentum)
  First,      ///< the first eigenvector returned by the eigensolver
};

std::string_view to_string(DegenerateChoice choice);
DegenerateChoice parse_degenerate_choice(std::string_view name);

/// Picks one normalized representative; the phase is fixed so the largest amplitude is real positive.
StateVector representative_state(const GroundSpace& space, DegenerateChoice choice);

}  // namespace qaoalab
