#pragma once

#include "qaoalab/models.hpp"
#include "qaoalab/state.hpp"

#include <string_view>

namespace qaoalab {

/// Layer generators. Every sum runs over all N sites with periodic wrap-around:
///   ZZ   = -sum Z_i Z_{i+1}
///   X    = -sum X_i
///   Z    = -sum Z_i
///   ZZZ  = -sum Z_i Z_{i+1} Z_{i+2}
///   XXYY = -sum (X_i X_{i+1} + Y_i Y_{i+1})
enum class GeneratorLabel { ZZ, X, Z, ZZZ, XXYY };

std::string_view to_string(GeneratorLabel label);
GeneratorLabel parse_generator(std::string_view name);

bool is_diagonal(GeneratorLabel label);
int minimum_spins(GeneratorLabel label);

/// The generator as an explicit Pauli-string model (used for dense cross-checks).
SpinChainModel generator_model(GeneratorLabel label, int n_spins);

/// state <- exp(-i theta H_label) state, exact to floating point.
void apply_layer(StateVector& state, GeneratorLabel label, double theta);

/// |-> ... ->> (direction +1) or |<- ... <-> (direction -1).
StateVector product_state_x(int n_spins, int direction);

/// Ground state of the XXYY generator restricted to basis states with sum Z = magnetization.
/// Sign is fixed so the first nonzero amplitude is positive.
StateVector xxyy_sector_ground(int n_spins, int magnetization);

/// Number of spins in state 1 (down) for a given total magnetization, validating parity and range.
int down_count_for(int n_spins, int magnetization);

/// |<target|state>|^2
double fidelity(const StateVector& state, const StateVector& target);
/// <state|P|state> with P the projector onto the ground space.
double fidelity(const StateVector& state, const GroundSpace& target);

/// <state|H|state>, computed term by term.
double energy(const StateVector& state, const SpinChainModel& model);

}  // namespace qaoalab
