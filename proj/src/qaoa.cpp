#include "qaoalab/qaoa.hpp"

#include "qaoalab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace qaoalab {

namespace {

constexpr double kPi = std::numbers::pi;

void apply_circuit(StateVector& state, const Protocol& protocol, const AngleSchedule& schedule) {
  for (int layer = 0; layer < schedule.layers(); ++layer) {
    for (int j = 0; j < protocol.generator_count(); ++j) {
      apply_layer(state, protocol.generators[static_cast<std::size_t>(j)], schedule(layer, j));
    }
  }
}

void check_shape(const Protocol& protocol, const AngleSchedule& schedule) {
  if (schedule.layers() != protocol.layers || schedule.generators() != protocol.generator_count()) {
    throw ConfigError("angle schedule is " + std::to_string(schedule.layers()) + "x" +
                      std::to_string(schedule.generators()) + " but the protocol needs " +
                      std::to_string(protocol.layers) + "x" + std::to_string(protocol.generator_count()));
  }
}

bool contains(const Protocol& protocol, GeneratorLabel label) {
  return std::find(protocol.generators.begin(), protocol.generators.end(), label) != protocol.generators.end();
}

}  // namespace

std::string describe(const InitialState& initial) {
  switch (initial.kind) {
    case InitialKind::XPlus: return "x+";
    case InitialKind::XMinus: return "x-";
    case InitialKind::Sector: return "sector(" + std::to_string(initial.magnetization) + ")";
  }
  return "?";
}

InitialState parse_initial(std::string_view name, int magnetization) {
  if (name == "x+") return {InitialKind::XPlus, 0};
  if (name == "x-") return {InitialKind::XMinus, 0};
  if (name == "sector") return {InitialKind::Sector, magnetization};
  throw ConfigError("unknown initial state '" + std::string(name) + "'");
}

double Protocol::domain_length(int j) const {
  switch (generators.at(static_cast<std::size_t>(j))) {
    case GeneratorLabel::ZZ: return kPi / 2;
    case GeneratorLabel::X:
    case GeneratorLabel::Z: return kPi;
    case GeneratorLabel::ZZZ:
      // A pi/2 shift multiplies by prod Z_i, which is only a phase when nothing
      // else in the circuit flips spins individually and the start has fixed magnetization.
      return (!contains(*this, GeneratorLabel::X) && initial.kind == InitialKind::Sector) ? kPi / 2 : kPi;
    case GeneratorLabel::XXYY: return 0.0;
  }
  return 0.0;
}

void Protocol::validate(int n_spins) const {
  if (generators.empty()) throw ConfigError("protocol needs at least one generator");
  if (layers < 1) throw ConfigError("protocol.p must be at least 1");
  for (auto g : generators) {
    if (n_spins < minimum_spins(g)) {
      throw ConfigError("generator " + std::string(to_string(g)) + " needs at least " +
                        std::to_string(minimum_spins(g)) + " spins");
    }
  }
  if (initial.kind == InitialKind::Sector) down_count_for(n_spins, initial.magnetization);
}

Protocol make_protocol(std::string_view name, int layers, InitialState initial) {
  using G = GeneratorLabel;
  Protocol p;
  p.name = std::string(name);
  p.layers = layers;
  p.initial = initial;
  if (name == "ising3") p.generators = {G::ZZ, G::X, G::Z};
  else if (name == "ising2") p.generators = {G::ZZ, G::X};
  else if (name == "threespin3") p.generators = {G::ZZZ, G::X, G::Z};
  else if (name == "appendix2") p.generators = {G::ZZZ, G::XXYY};
  else if (name == "appendix3") p.generators = {G::ZZZ, G::XXYY, G::X};
  else throw ConfigError("unknown protocol '" + std::string(name) + "'");
  if (layers < 1) throw ConfigError("protocol.p must be at least 1");
  return p;
}

InitialState default_initial(std::string_view protocol_name, int n_spins) {
  if (protocol_name == "appendix2" || protocol_name == "appendix3") {
    return {InitialKind::Sector, -(n_spins / 3)};
  }
  return {InitialKind::XPlus, 0};
}

StateVector initial_state(const Protocol& protocol, int n_spins) {
  switch (protocol.initial.kind) {
    case InitialKind::XPlus: return product_state_x(n_spins, 1);
    case InitialKind::XMinus: return product_state_x(n_spins, -1);
    case InitialKind::Sector: return xxyy_sector_ground(n_spins, protocol.initial.magnetization);
  }
  throw ConfigError("unknown initial state");
}

AngleSchedule::AngleSchedule(int layers, int generators) {
  if (layers < 1 || generators < 1) throw ConfigError("schedule needs at least one layer and generator");
  angles_ = Eigen::MatrixXd::Zero(layers, generators);
}

AngleSchedule::AngleSchedule(Eigen::MatrixXd angles) : angles_(std::move(angles)) {
  if (angles_.rows() < 1 || angles_.cols() < 1) throw ConfigError("schedule needs at least one layer and generator");
}

AngleSchedule AngleSchedule::from_flat(std::span<const double> flat, int layers, int generators) {
  if (flat.size() != static_cast<std::size_t>(layers) * static_cast<std::size_t>(generators)) {
    throw ConfigError("flat angle vector has the wrong length");
  }
  AngleSchedule s(layers, generators);
  for (int i = 0; i < layers; ++i) {
    for (int j = 0; j < generators; ++j) s(i, j) = flat[static_cast<std::size_t>(i * generators + j)];
  }
  return s;
}

std::vector<double> AngleSchedule::flat() const {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(angles_.size()));
  for (int i = 0; i < layers(); ++i) {
    for (int j = 0; j < generators(); ++j) out.push_back(angles_(i, j));
  }
  return out;
}

StateVector evolve(const Protocol& protocol, const AngleSchedule& schedule, int n_spins) {
  protocol.validate(n_spins);
  check_shape(protocol, schedule);
  StateVector state = initial_state(protocol, n_spins);
  apply_circuit(state, protocol, schedule);
  return state;
}

double reduce_angle(double theta, double domain) {
  if (!std::isfinite(theta)) throw ConfigError("angles must be finite");
  if (!(domain > 0.0)) return theta;
  double r = std::fmod(theta, domain);
  if (r < 0.0) r += domain;
  if (r >= domain) r -= domain;
  return r;
}

AngleSchedule reduce_angles(const AngleSchedule& schedule, const Protocol& protocol) {
  check_shape(protocol, schedule);
  AngleSchedule out = schedule;
  for (int i = 0; i < out.layers(); ++i) {
    for (int j = 0; j < out.generators(); ++j) out(i, j) = reduce_angle(out(i, j), protocol.domain_length(j));
  }
  return out;
}

double total_time(const AngleSchedule& schedule) { return schedule.matrix().sum(); }

std::pair<Protocol, AngleSchedule> canonicalize_parity(const Protocol& protocol, const AngleSchedule& schedule) {
  check_shape(protocol, schedule);
  if (protocol.initial.kind == InitialKind::Sector) {
    throw ConfigError("parity canonicalization needs an x-polarized initial state");
  }
  Protocol out_protocol = protocol;
  AngleSchedule out = schedule;
  const int m = protocol.generator_count();
  for (int layer = 0; layer < out.layers(); ++layer) {
    for (int j = 0; j < m; ++j) {
      if (protocol.generators[static_cast<std::size_t>(j)] != GeneratorLabel::Z) continue;
      double theta = reduce_angle(out(layer, j), kPi);
      if (theta >= kPi / 2) {
        theta -= kPi / 2;
        // Every X layer applied before this one changes sign.
        for (int l = 0; l <= layer; ++l) {
          for (int k = 0; k < m; ++k) {
            const bool earlier = l < layer || k < j;
            if (earlier && protocol.generators[static_cast<std::size_t>(k)] == GeneratorLabel::X) out(l, k) = -out(l, k);
          }
        }
        auto& kind = out_protocol.initial.kind;
        kind = kind == InitialKind::XPlus ? InitialKind::XMinus : InitialKind::XPlus;
      }
      out(layer, j) = theta;
    }
  }
  return {out_protocol, reduce_angles(out, out_protocol)};
}

std::string_view to_string(CostKind kind) {
  switch (kind) {
    case CostKind::Infidelity: return "infidelity";
    case CostKind::RelativeEnergy: return "energy";
    case CostKind::RelativeEntropy: return "relent";
  }
  return "?";
}

CostKind parse_cost_kind(std::string_view name) {
  if (name == "infidelity") return CostKind::Infidelity;
  if (name == "energy") return CostKind::RelativeEnergy;
  if (name == "relent") return CostKind::RelativeEntropy;
  throw ConfigError("unknown cost kind '" + std::string(name) + "'");
}

double spectral_relative_entropy(const ProbabilitySpectrum& p, const ProbabilitySpectrum& q) {
  const std::size_t n = std::max(p.size(), q.size());
  auto floored = [n](const ProbabilitySpectrum& s) {
    std::vector<double> v(n, kRelativeEntropyFloor);
    double total = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      if (k < s.size()) v[k] = std::max(s[k], kRelativeEntropyFloor);
      total += v[k];
    }
    for (double& x : v) x /= total;
    return v;
  };
  const auto a = floored(p);
  const auto b = floored(q);
  double d = 0.0;
  for (std::size_t k = 0; k < n; ++k) d += a[k] * std::log(a[k] / b[k]);
  return std::max(d, 0.0);
}

CostFunction::CostFunction(Protocol protocol, const SpinChainModel& model, CostKind kind, CostTarget target)
    : protocol_(std::move(protocol)),
      model_(std::make_shared<const SpinChainModel>(model)),
      kind_(kind),
      target_(std::make_shared<const CostTarget>(std::move(target))) {
  protocol_.validate(model.n_spins);
  switch (kind_) {
    case CostKind::Infidelity:
      if (!target_->fidelity) throw ConfigError("infidelity cost needs a target state or ground space");
      break;
    case CostKind::RelativeEnergy:
      if (!target_->energies) throw ConfigError("relative-energy cost needs the extremal energies");
      if (!(target_->energies->e_max > target_->energies->e_min)) {
        throw NumericError("relative energy undefined: E_max equals E_min");
      }
      break;
    case CostKind::RelativeEntropy:
      if (!target_->spectrum) throw ConfigError("relative-entropy cost needs a target spectrum");
      if (target_->cut < 1 || target_->cut >= model.n_spins) throw ConfigError("relative-entropy cut out of range");
      break;
  }
  initial_ = std::make_shared<const StateVector>(initial_state(protocol_, model.n_spins));
}

double CostFunction::operator()(const AngleSchedule& schedule) const {
  check_shape(protocol_, schedule);
  StateVector state = *initial_;
  apply_circuit(state, protocol_, schedule);
  return of_state(state);
}

double CostFunction::operator()(std::span<const double> flat) const {
  return (*this)(AngleSchedule::from_flat(flat, protocol_.layers, protocol_.generator_count()));
}

double CostFunction::of_state(const StateVector& state) const {
  switch (kind_) {
    case CostKind::Infidelity: return infidelity(state);
    case CostKind::RelativeEnergy: return relative_energy(state);
    case CostKind::RelativeEntropy: return relative_entropy(state);
  }
  return 0.0;
}

double CostFunction::infidelity(const StateVector& state) const {
  if (!target_->fidelity) throw ConfigError("no fidelity target");
  const double f = std::visit([&](const auto& t) { return fidelity(state, t); }, *target_->fidelity);
  return std::clamp(1.0 - f, 0.0, 1.0);
}

double CostFunction::relative_energy(const StateVector& state) const {
  if (!target_->energies) throw ConfigError("no energy range");
  const auto& r = *target_->energies;
  return std::clamp((energy(state, *model_) - r.e_min) / (r.e_max - r.e_min), 0.0, 1.0);
}

double CostFunction::relative_entropy(const StateVector& state) const {
  if (!target_->spectrum) throw ConfigError("no target spectrum");
  return spectral_relative_entropy(entanglement_spectrum(state, target_->cut), *target_->spectrum);
}

double cost(const Protocol& protocol, const AngleSchedule& schedule, const SpinChainModel& model, CostKind kind,
            const CostTarget& target) {
  return CostFunction(protocol, model, kind, target)(schedule);
}

}  // namespace qaoalab
