#pragma once

#include "qaoalab/models.hpp"
#include "qaoalab/simulator.hpp"
#include "qaoalab/spectra.hpp"

#include <Eigen/Dense>

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace qaoalab {

enum class InitialKind { XPlus, XMinus, Sector };

struct InitialState {
  InitialKind kind = InitialKind::XPlus;
  /// Total sum Z of the hopping-sector ground state (Sector only).
  int magnetization = 0;
};

std::string describe(const InitialState& initial);
/// "x+", "x-", or "sector" (the latter takes `magnetization`).
InitialState parse_initial(std::string_view name, int magnetization);

/**
 * A layered alternating-operator circuit.
 *
 * Generators are listed H_1 ... H_M and applied in that order within each layer;
 * layer 1 acts first on the initial state. With x-polarized starts this puts a
 * nontrivial generator (ZZ or ZZZ) first, so no layer is wasted on an eigenstate.
 */
struct Protocol {
  std::string name;
  std::vector<GeneratorLabel> generators;
  int layers = 1;
  InitialState initial;

  int generator_count() const { return static_cast<int>(generators.size()); }
  int parameter_count() const { return layers * generator_count(); }

  /// Period used to reduce angles of generator j; 0 means the angle is never reduced.
  double domain_length(int j) const;

  /// Throws ConfigError if the protocol cannot run on an N-spin chain.
  void validate(int n_spins) const;
};

/// Named presets: ising3 (ZZ, X, Z), ising2 (ZZ, X), threespin3 (ZZZ, X, Z),
/// appendix2 (ZZZ, XXYY), appendix3 (ZZZ, XXYY, X).
Protocol make_protocol(std::string_view name, int layers, InitialState initial);
/// x+ for the product-state protocols, the -N/3 hopping sector for the appendix ones.
InitialState default_initial(std::string_view protocol_name, int n_spins);

StateVector initial_state(const Protocol& protocol, int n_spins);

/// Angles theta(i, j) for layer i and generator j, stored p x M.
class AngleSchedule {
 public:
  AngleSchedule(int layers, int generators);
  explicit AngleSchedule(Eigen::MatrixXd angles);

  /// Row-major (layer by layer) unpacking of a flat parameter vector.
  static AngleSchedule from_flat(std::span<const double> flat, int layers, int generators);

  int layers() const { return static_cast<int>(angles_.rows()); }
  int generators() const { return static_cast<int>(angles_.cols()); }
  double operator()(int layer, int generator) const { return angles_(layer, generator); }
  double& operator()(int layer, int generator) { return angles_(layer, generator); }
  const Eigen::MatrixXd& matrix() const { return angles_; }

  std::vector<double> flat() const;

 private:
  Eigen::MatrixXd angles_;
};

/// U(theta)|initial>.
StateVector evolve(const Protocol& protocol, const AngleSchedule& schedule, int n_spins);
inline StateVector evolve(const Protocol& protocol, const AngleSchedule& schedule, const SpinChainModel& model) {
  return evolve(protocol, schedule, model.n_spins);
}

/// Maps every angle into [0, domain) for generators with a finite domain.
AngleSchedule reduce_angles(const AngleSchedule& schedule, const Protocol& protocol);
double reduce_angle(double theta, double domain);

/// Sum of all entries.
double total_time(const AngleSchedule& schedule);

/// Uses the parity identity to move every Z-generator angle into [0, pi/2): a pi/2
/// shift of a Z angle equals flipping the x-polarized initial state and negating the
/// X angles applied before it. Returns the equivalent protocol (possibly with the
/// opposite initial direction) and reduced schedule.
std::pair<Protocol, AngleSchedule> canonicalize_parity(const Protocol& protocol, const AngleSchedule& schedule);

enum class CostKind { Infidelity, RelativeEnergy, RelativeEntropy };

std::string_view to_string(CostKind kind);
/// "infidelity", "energy", "relent".
CostKind parse_cost_kind(std::string_view name);

using FidelityTarget = std::variant<GroundSpace, StateVector>;

struct CostTarget {
  std::optional<FidelityTarget> fidelity;
  std::optional<EnergyRange> energies;
  /// Target entanglement spectrum for the relative-entropy cost.
  std::optional<ProbabilitySpectrum> spectrum;
  int cut = 0;
};

inline constexpr double kRelativeEntropyFloor = 1e-15;

/// sum_k p_k ln(p_k / q_k) after flooring both spectra at 1e-15 and renormalizing.
double spectral_relative_entropy(const ProbabilitySpectrum& p, const ProbabilitySpectrum& q);

/// Circuit cost evaluator; cheap to copy and safe to share between threads.
class CostFunction {
 public:
  CostFunction(Protocol protocol, const SpinChainModel& model, CostKind kind, CostTarget target);

  double operator()(const AngleSchedule& schedule) const;
  double operator()(std::span<const double> flat) const;

  /// Cost of an already prepared state.
  double of_state(const StateVector& state) const;

  double infidelity(const StateVector& state) const;
  double relative_energy(const StateVector& state) const;
  double relative_entropy(const StateVector& state) const;

  bool has_fidelity_target() const { return target_->fidelity.has_value(); }
  bool has_energy_range() const { return target_->energies.has_value(); }

  const Protocol& protocol() const { return protocol_; }
  const SpinChainModel& model() const { return *model_; }
  const CostTarget& target() const { return *target_; }
  CostKind kind() const { return kind_; }

 private:
  Protocol protocol_;
  std::shared_ptr<const SpinChainModel> model_;
  CostKind kind_;
  std::shared_ptr<const CostTarget> target_;
  std::shared_ptr<const StateVector> initial_;
};

double cost(const Protocol& protocol, const AngleSchedule& schedule, const SpinChainModel& model, CostKind kind,
            const CostTarget& target);

}  // namespace qaoalab
