#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <cstdint>
#include <filesystem>

namespace qaoalab {

using complex = std::complex<double>;

/// Largest chain handled by the exact state-vector routines.
inline constexpr int kMaxStateSpins = 24;

/**
 * Normalized amplitudes of an N-spin chain in the computational (Z) basis.
 *
 * Bit i of a basis index is spin i (bit 0 least significant); a bit value of 0
 * is the Z = +1 ("up") state and 1 is Z = -1 ("down").
 */
class StateVector {
 public:
  /// The all-up basis state |0...0>.
  explicit StateVector(int n_spins);

  /// Takes ownership of `amplitudes` and normalizes them. Throws ConfigError unless the
  /// size is 2^n and NumericError for a zero or non-finite norm.
  StateVector(int n_spins, Eigen::VectorXcd amplitudes);

  static StateVector basis_state(int n_spins, std::uint64_t index);

  int n_spins() const { return n_spins_; }
  std::size_t dimension() const { return static_cast<std::size_t>(amplitudes_.size()); }

  const Eigen::VectorXcd& amplitudes() const { return amplitudes_; }
  Eigen::VectorXcd& amplitudes() { return amplitudes_; }

  complex operator[](std::size_t index) const { return amplitudes_[static_cast<Eigen::Index>(index)]; }

  double norm() const { return amplitudes_.norm(); }
  void normalize();

  /// <this|other>
  complex inner(const StateVector& other) const;

 private:
  int n_spins_;
  Eigen::VectorXcd amplitudes_;
};

std::uint64_t dimension_for(int n_spins);

/// Image of a basis index under the one-site cyclic shift (site i -> site i+1 mod N).
std::uint64_t shift_index(std::uint64_t index, int n_spins);

/// Applies the one-site cyclic shift to every amplitude.
StateVector translate(const StateVector& state);

/// JSON dump: {"n_spins", "bit_order", "amplitudes": [[re, im], ...]}.
void write_state_json(const StateVector& state, const std::filesystem::path& path);
StateVector read_state_json(const std::filesystem::path& path);

}  // namespace qaoalab
