#include "qaoalab/models.hpp"

#include "qaoalab/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <bit>
#include <cmath>
#include <set>

namespace qaoalab {

namespace {

void check_cap(int n_spins, int max_spins) {
  if (n_spins > max_spins) {
    throw ConfigError("dense matrix requested for N=" + std::to_string(n_spins) + " above the cap of " +
                      std::to_string(max_spins));
  }
}

complex i_power(int k) {
  switch (((k % 4) + 4) % 4) {
    case 0: return {1.0, 0.0};
    case 1: return {0.0, 1.0};
    case 2: return {-1.0, 0.0};
    default: return {0.0, -1.0};
  }
}

void fix_phase(Eigen::VectorXcd& v) {
  Eigen::Index arg = 0;
  v.cwiseAbs().maxCoeff(&arg);
  const complex pivot = v[arg];
  if (std::abs(pivot) > 0.0) {
    v *= std::conj(pivot) / std::abs(pivot);
  }
}

template <typename Matrix>
ExactSolution from_eigensolver(const Eigen::SelfAdjointEigenSolver<Matrix>& solver, int n_spins,
                               double tolerance) {
  if (solver.info() != Eigen::Success) {
    throw NumericError("dense diagonalization failed");
  }
  const auto& values = solver.eigenvalues();
  ExactSolution out;
  out.e_min = values[0];
  out.e_max = values[values.size() - 1];
  out.ground.energy = values[0];
  out.ground.tolerance = tolerance;
  for (Eigen::Index k = 0; k < values.size() && values[k] <= values[0] + tolerance; ++k) {
    Eigen::VectorXcd v = solver.eigenvectors().col(k).template cast<complex>();
    out.ground.basis.emplace_back(n_spins, std::move(v));
  }
  return out;
}

}  // namespace

PauliMasks masks_of(const PauliTerm& term) {
  PauliMasks m;
  for (const auto& f : term.factors) {
    const std::uint64_t bit = std::uint64_t{1} << f.site;
    switch (f.axis) {
      case Axis::X:
        m.flip_mask |= bit;
        break;
      case Axis::Y:
        m.flip_mask |= bit;
        m.phase_mask |= bit;
        ++m.y_count;
        break;
      case Axis::Z:
        m.phase_mask |= bit;
        break;
    }
  }
  return m;
}

std::string_view to_string(Family family) {
  switch (family) {
    case Family::FmIsing: return "fm";
    case Family::AfmIsing: return "afm";
    case Family::ThreeSpin: return "threespin";
    case Family::Custom: return "custom";
  }
  return "custom";
}

Family parse_family(std::string_view name) {
  if (name == "fm" || name == "fm-ising") return Family::FmIsing;
  if (name == "afm" || name == "afm-ising") return Family::AfmIsing;
  if (name == "threespin" || name == "three-spin") return Family::ThreeSpin;
  throw ConfigError("unknown model family '" + std::string(name) + "'");
}

bool SpinChainModel::is_real() const {
  return std::all_of(terms.begin(), terms.end(), [](const PauliTerm& t) { return masks_of(t).y_count % 2 == 0; });
}

int minimum_spins(Family family) { return family == Family::ThreeSpin ? 3 : 2; }

SpinChainModel build_model(Family family, int n_spins, double hx, double hz) {
  if (family == Family::Custom) {
    throw ConfigError("build_model does not construct custom models");
  }
  if (n_spins < minimum_spins(family)) {
    throw ConfigError("family " + std::string(to_string(family)) + " needs at least " +
                      std::to_string(minimum_spins(family)) + " spins, got " + std::to_string(n_spins));
  }
  if (n_spins > kMaxStateSpins) {
    throw ConfigError("N=" + std::to_string(n_spins) + " exceeds the state-vector limit");
  }
  if (!std::isfinite(hx) || !std::isfinite(hz)) {
    throw ConfigError("field strengths must be finite");
  }
  SpinChainModel model;
  model.n_spins = n_spins;
  model.family = family;
  model.hx = hx;
  model.hz = hz;
  const double coupling = family == Family::AfmIsing ? -1.0 : 1.0;
  for (int i = 0; i < n_spins; ++i) {
    PauliTerm bond{-coupling, {{i, Axis::Z}, {(i + 1) % n_spins, Axis::Z}}};
    if (family == Family::ThreeSpin) {
      bond.factors.push_back({(i + 2) % n_spins, Axis::Z});
    }
    model.terms.push_back(std::move(bond));
  }
  for (int i = 0; i < n_spins; ++i) {
    if (hx != 0.0) model.terms.push_back({-hx, {{i, Axis::X}}});
    if (hz != 0.0) model.terms.push_back({-hz, {{i, Axis::Z}}});
  }
  return model;
}

SpinChainModel custom_model(int n_spins, std::vector<PauliTerm> terms) {
  dimension_for(n_spins);
  for (const auto& t : terms) {
    std::set<int> seen;
    for (const auto& f : t.factors) {
      if (f.site < 0 || f.site >= n_spins) {
        throw ConfigError("Pauli factor site " + std::to_string(f.site) + " out of range");
      }
      if (!seen.insert(f.site).second) {
        throw ConfigError("Pauli term repeats site " + std::to_string(f.site));
      }
    }
    if (!std::isfinite(t.coefficient)) {
      throw ConfigError("non-finite term coefficient");
    }
  }
  SpinChainModel model;
  model.n_spins = n_spins;
  model.terms = std::move(terms);
  model.family = Family::Custom;
  return model;
}

Eigen::MatrixXcd to_dense(const SpinChainModel& model, int max_spins) {
  check_cap(model.n_spins, max_spins);
  const std::uint64_t dim = dimension_for(model.n_spins);
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  for (const auto& term : model.terms) {
    const PauliMasks m = masks_of(term);
    const complex prefactor = term.coefficient * i_power(m.y_count);
    for (std::uint64_t b = 0; b < dim; ++b) {
      const double sign = (std::popcount(b & m.phase_mask) & 1) ? -1.0 : 1.0;
      h(static_cast<Eigen::Index>(b ^ m.flip_mask), static_cast<Eigen::Index>(b)) += sign * prefactor;
    }
  }
  return h;
}

Eigen::MatrixXd to_dense_real(const SpinChainModel& model, int max_spins) {
  if (!model.is_real()) {
    throw ConfigError("model has complex matrix elements");
  }
  check_cap(model.n_spins, max_spins);
  const std::uint64_t dim = dimension_for(model.n_spins);
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  for (const auto& term : model.terms) {
    const PauliMasks m = masks_of(term);
    const double prefactor = term.coefficient * i_power(m.y_count).real();
    for (std::uint64_t b = 0; b < dim; ++b) {
      const double sign = (std::popcount(b & m.phase_mask) & 1) ? -1.0 : 1.0;
      h(static_cast<Eigen::Index>(b ^ m.flip_mask), static_cast<Eigen::Index>(b)) += sign * prefactor;
    }
  }
  return h;
}

Eigen::VectorXcd apply_model(const SpinChainModel& model, const Eigen::VectorXcd& amplitudes) {
  const std::uint64_t dim = dimension_for(model.n_spins);
  if (static_cast<std::uint64_t>(amplitudes.size()) != dim) {
    throw ConfigError("state dimension does not match the model");
  }
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(amplitudes.size());
  for (const auto& term : model.terms) {
    const PauliMasks m = masks_of(term);
    const complex prefactor = term.coefficient * i_power(m.y_count);
    for (std::uint64_t b = 0; b < dim; ++b) {
      const double sign = (std::popcount(b & m.phase_mask) & 1) ? -1.0 : 1.0;
      out[static_cast<Eigen::Index>(b ^ m.flip_mask)] += sign * prefactor * amplitudes[static_cast<Eigen::Index>(b)];
    }
  }
  return out;
}

ExactSolution solve_exact(const SpinChainModel& model, double tolerance, int max_spins) {
  if (!(tolerance >= 0.0)) {
    throw ConfigError("degeneracy tolerance must be non-negative");
  }
  if (model.is_real()) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(to_dense_real(model, max_spins));
    return from_eigensolver(solver, model.n_spins, tolerance);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(to_dense(model, max_spins));
  return from_eigensolver(solver, model.n_spins, tolerance);
}

GroundSpace ground_space(const SpinChainModel& model, double tolerance, int max_spins) {
  return solve_exact(model, tolerance, max_spins).ground;
}

EnergyRange extremal_energies(const SpinChainModel& model, int max_spins) {
  Eigen::VectorXd values;
  if (model.is_real()) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(to_dense_real(model, max_spins), Eigen::EigenvaluesOnly);
    values = solver.eigenvalues();
  } else {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(to_dense(model, max_spins), Eigen::EigenvaluesOnly);
    values = solver.eigenvalues();
  }
  return {values[0], values[values.size() - 1]};
}

std::string_view to_string(DegenerateChoice choice) {
  return choice == DegenerateChoice::Symmetric ? "symmetric" : "first";
}

DegenerateChoice parse_degenerate_choice(std::string_view name) {
  if (name == "symmetric") return DegenerateChoice::Symmetric;
  if (name == "first") return DegenerateChoice::First;
  throw ConfigError("unknown degenerate-state choice '" + std::string(name) + "'");
}

StateVector representative_state(const GroundSpace& space, DegenerateChoice choice) {
  if (space.basis.empty()) {
    throw NumericError("empty ground space");
  }
  Eigen::VectorXcd v = space.basis.front().amplitudes();
  if (choice == DegenerateChoice::Symmetric && space.degeneracy() > 1) {
    // Translation restricted to the ground space; its eigenvector nearest eigenvalue 1
    // is the zero-momentum combination.
    const int d = space.degeneracy();
    std::vector<StateVector> shifted;
    shifted.reserve(static_cast<std::size_t>(d));
    for (const auto& b : space.basis) shifted.push_back(translate(b));
    Eigen::MatrixXcd t(d, d);
    for (int k = 0; k < d; ++k) {
      for (int l = 0; l < d; ++l) {
        t(k, l) = space.basis[static_cast<std::size_t>(k)].inner(shifted[static_cast<std::size_t>(l)]);
      }
    }
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(t);
    Eigen::Index best = 0;
    (solver.eigenvalues().array() - complex(1.0, 0.0)).abs().minCoeff(&best);
    const Eigen::VectorXcd coeffs = solver.eigenvectors().col(best);
    v.setZero();
    for (int l = 0; l < d; ++l) {
      v += coeffs[l] * space.basis[static_cast<std::size_t>(l)].amplitudes();
    }
  }
  fix_phase(v);
  return StateVector(space.n_spins(), std::move(v));
}

}  // namespace qaoalab
