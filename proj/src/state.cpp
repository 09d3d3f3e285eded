#include "qaoalab/state.hpp"

#include "qaoalab/errors.hpp"

#include <json.hpp>

#include <fstream>
#include <string>

namespace qaoalab {

std::uint64_t dimension_for(int n_spins) {
  if (n_spins < 1 || n_spins > kMaxStateSpins) {
    throw ConfigError("spin count " + std::to_string(n_spins) + " outside [1, " +
                      std::to_string(kMaxStateSpins) + "]");
  }
  return std::uint64_t{1} << n_spins;
}

StateVector::StateVector(int n_spins)
    : n_spins_(n_spins), amplitudes_(Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(dimension_for(n_spins)))) {
  amplitudes_[0] = 1.0;
}

StateVector::StateVector(int n_spins, Eigen::VectorXcd amplitudes)
    : n_spins_(n_spins), amplitudes_(std::move(amplitudes)) {
  if (static_cast<std::uint64_t>(amplitudes_.size()) != dimension_for(n_spins)) {
    throw ConfigError("amplitude count " + std::to_string(amplitudes_.size()) + " is not 2^" +
                      std::to_string(n_spins));
  }
  normalize();
}

StateVector StateVector::basis_state(int n_spins, std::uint64_t index) {
  StateVector state(n_spins);
  if (index >= state.dimension()) {
    throw ConfigError("basis index out of range");
  }
  state.amplitudes_[0] = 0.0;
  state.amplitudes_[static_cast<Eigen::Index>(index)] = 1.0;
  return state;
}

void StateVector::normalize() {
  const double n = amplitudes_.norm();
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw NumericError("cannot normalize a zero or non-finite state");
  }
  amplitudes_ /= n;
}

complex StateVector::inner(const StateVector& other) const {
  if (other.n_spins_ != n_spins_) {
    throw ConfigError("inner product between states of different size");
  }
  return amplitudes_.dot(other.amplitudes_);
}

std::uint64_t shift_index(std::uint64_t index, int n_spins) {
  const std::uint64_t mask = (std::uint64_t{1} << n_spins) - 1;
  return ((index << 1) | (index >> (n_spins - 1))) & mask;
}

StateVector translate(const StateVector& state) {
  Eigen::VectorXcd out(state.amplitudes().size());
  for (std::uint64_t b = 0; b < state.dimension(); ++b) {
    out[static_cast<Eigen::Index>(shift_index(b, state.n_spins()))] = state[b];
  }
  return StateVector(state.n_spins(), std::move(out));
}

void write_state_json(const StateVector& state, const std::filesystem::path& path) {
  nlohmann::json doc;
  doc["n_spins"] = state.n_spins();
  doc["bit_order"] = "bit i is site i (bit 0 least significant); bit value 0 is Z=+1";
  auto& amps = doc["amplitudes"] = nlohmann::json::array();
  for (std::uint64_t b = 0; b < state.dimension(); ++b) {
    amps.push_back({state[b].real(), state[b].imag()});
  }
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot write " + path.string());
  }
  out << doc.dump() << '\n';
}

StateVector read_state_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot read " + path.string());
  }
  nlohmann::json doc;
  try {
    in >> doc;
    const int n = doc.at("n_spins").get<int>();
    const auto& amps = doc.at("amplitudes");
    Eigen::VectorXcd v(static_cast<Eigen::Index>(amps.size()));
    for (std::size_t i = 0; i < amps.size(); ++i) {
      v[static_cast<Eigen::Index>(i)] = complex(amps[i].at(0).get<double>(), amps[i].at(1).get<double>());
    }
    return StateVector(n, std::move(v));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("malformed state file " + path.string() + ": " + e.what());
  }
}

}  // namespace qaoalab
