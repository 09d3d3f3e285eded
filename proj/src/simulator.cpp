#include "qaoalab/simulator.hpp"

#include "qaoalab/errors.hpp"

#include <Eigen/Eigenvalues>

#include <bit>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <utility>

namespace qaoalab {

namespace {

/// Integer eigenvalue of a diagonal generator for every basis state.
using DiagonalLevels = std::vector<std::int16_t>;

DiagonalLevels build_levels(GeneratorLabel label, int n) {
  const std::uint64_t dim = dimension_for(n);
  DiagonalLevels levels(dim);
  for (std::uint64_t b = 0; b < dim; ++b) {
    auto z = [&](int site) { return ((b >> ((site % n))) & 1u) ? -1 : 1; };
    int sum = 0;
    for (int i = 0; i < n; ++i) {
      switch (label) {
        case GeneratorLabel::ZZ: sum += z(i) * z(i + 1); break;
        case GeneratorLabel::ZZZ: sum += z(i) * z(i + 1) * z(i + 2); break;
        case GeneratorLabel::Z: sum += z(i); break;
        default: break;
      }
    }
    levels[b] = static_cast<std::int16_t>(-sum);
  }
  return levels;
}

const DiagonalLevels& diagonal_levels(GeneratorLabel label, int n) {
  static std::mutex mutex;
  static std::map<std::pair<GeneratorLabel, int>, std::unique_ptr<DiagonalLevels>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[{label, n}];
  if (!slot) slot = std::make_unique<DiagonalLevels>(build_levels(label, n));
  return *slot;
}

/// Eigendecomposition of the hopping generator inside one magnetization sector.
struct HoppingSector {
  std::vector<std::uint64_t> indices;
  Eigen::MatrixXd vectors;
  Eigen::VectorXd values;
};

using HoppingSectors = std::vector<HoppingSector>;  // indexed by number of down spins

HoppingSectors build_sectors(int n) {
  const std::uint64_t dim = dimension_for(n);
  HoppingSectors sectors(static_cast<std::size_t>(n) + 1);
  std::vector<Eigen::Index> position(dim);
  for (std::uint64_t b = 0; b < dim; ++b) {
    auto& s = sectors[static_cast<std::size_t>(std::popcount(b))];
    position[b] = static_cast<Eigen::Index>(s.indices.size());
    s.indices.push_back(b);
  }
  for (auto& s : sectors) {
    const auto size = static_cast<Eigen::Index>(s.indices.size());
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(size, size);
    for (Eigen::Index col = 0; col < size; ++col) {
      const std::uint64_t b = s.indices[static_cast<std::size_t>(col)];
      for (int i = 0; i < n; ++i) {
        const std::uint64_t pair = (std::uint64_t{1} << i) | (std::uint64_t{1} << ((i + 1) % n));
        const std::uint64_t bits = b & pair;
        if (bits != 0 && bits != pair) {
          // (XX + YY)|01> = 2|10>
          h(position[b ^ pair], col) += -2.0;
        }
      }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h);
    if (solver.info() != Eigen::Success) {
      throw NumericError("hopping sector diagonalization failed");
    }
    s.vectors = solver.eigenvectors();
    s.values = solver.eigenvalues();
  }
  return sectors;
}

const HoppingSectors& hopping_sectors(int n) {
  static std::mutex mutex;
  static std::map<int, std::unique_ptr<HoppingSectors>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<HoppingSectors>(build_sectors(n));
  return *slot;
}

// The kernels below work on interleaved (re, im) doubles; std::complex products go
// through the NaN-checking runtime path without -ffast-math.

void apply_diagonal(StateVector& state, GeneratorLabel label, double theta) {
  const int n = state.n_spins();
  const auto& levels = diagonal_levels(label, n);
  std::vector<double> cos_table(static_cast<std::size_t>(2 * n + 1));
  std::vector<double> sin_table(cos_table.size());
  for (int v = -n; v <= n; ++v) {
    cos_table[static_cast<std::size_t>(v + n)] = std::cos(theta * v);
    sin_table[static_cast<std::size_t>(v + n)] = -std::sin(theta * v);
  }
  double* amp = reinterpret_cast<double*>(state.amplitudes().data());
  const std::size_t dim = state.dimension();
  for (std::size_t b = 0; b < dim; ++b) {
    const auto k = static_cast<std::size_t>(levels[b] + n);
    const double c = cos_table[k];
    const double s = sin_table[k];
    const double re = amp[2 * b];
    const double im = amp[2 * b + 1];
    amp[2 * b] = c * re - s * im;
    amp[2 * b + 1] = c * im + s * re;
  }
}

void apply_x(StateVector& state, double theta) {
  // exp(i theta X) on every site: a0' = c a0 + i s a1, a1' = i s a0 + c a1
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  double* amp = reinterpret_cast<double*>(state.amplitudes().data());
  const std::size_t dim = state.dimension();
  for (int q = 0; q < state.n_spins(); ++q) {
    const std::size_t stride = std::size_t{1} << q;
    for (std::size_t block = 0; block < dim; block += 2 * stride) {
      for (std::size_t k = block; k < block + stride; ++k) {
        double* a0 = amp + 2 * k;
        double* a1 = amp + 2 * (k + stride);
        const double r0 = a0[0], i0 = a0[1], r1 = a1[0], i1 = a1[1];
        a0[0] = c * r0 - s * i1;
        a0[1] = c * i0 + s * r1;
        a1[0] = c * r1 - s * i0;
        a1[1] = c * i1 + s * r0;
      }
    }
  }
}

void apply_hopping(StateVector& state, double theta) {
  const auto& sectors = hopping_sectors(state.n_spins());
  Eigen::VectorXcd& amp = state.amplitudes();
  for (const auto& s : sectors) {
    const auto size = static_cast<Eigen::Index>(s.indices.size());
    Eigen::VectorXcd local(size);
    for (Eigen::Index k = 0; k < size; ++k) local[k] = amp[static_cast<Eigen::Index>(s.indices[static_cast<std::size_t>(k)])];
    Eigen::VectorXcd modes = s.vectors.transpose() * local;
    for (Eigen::Index k = 0; k < size; ++k) modes[k] *= std::polar(1.0, -theta * s.values[k]);
    local = s.vectors * modes;
    for (Eigen::Index k = 0; k < size; ++k) amp[static_cast<Eigen::Index>(s.indices[static_cast<std::size_t>(k)])] = local[k];
  }
}

}  // namespace

std::string_view to_string(GeneratorLabel label) {
  switch (label) {
    case GeneratorLabel::ZZ: return "ZZ";
    case GeneratorLabel::X: return "X";
    case GeneratorLabel::Z: return "Z";
    case GeneratorLabel::ZZZ: return "ZZZ";
    case GeneratorLabel::XXYY: return "XXYY";
  }
  return "?";
}

GeneratorLabel parse_generator(std::string_view name) {
  if (name == "ZZ") return GeneratorLabel::ZZ;
  if (name == "X") return GeneratorLabel::X;
  if (name == "Z") return GeneratorLabel::Z;
  if (name == "ZZZ") return GeneratorLabel::ZZZ;
  if (name == "XXYY") return GeneratorLabel::XXYY;
  throw ConfigError("unknown generator label '" + std::string(name) + "'");
}

bool is_diagonal(GeneratorLabel label) {
  return label == GeneratorLabel::ZZ || label == GeneratorLabel::Z || label == GeneratorLabel::ZZZ;
}

int minimum_spins(GeneratorLabel label) {
  switch (label) {
    case GeneratorLabel::ZZZ: return 3;
    case GeneratorLabel::ZZ:
    case GeneratorLabel::XXYY: return 2;
    default: return 1;
  }
}

SpinChainModel generator_model(GeneratorLabel label, int n) {
  if (n < minimum_spins(label)) {
    throw ConfigError("generator " + std::string(to_string(label)) + " needs at least " +
                      std::to_string(minimum_spins(label)) + " spins");
  }
  std::vector<PauliTerm> terms;
  for (int i = 0; i < n; ++i) {
    const int j = (i + 1) % n;
    switch (label) {
      case GeneratorLabel::ZZ: terms.push_back({-1.0, {{i, Axis::Z}, {j, Axis::Z}}}); break;
      case GeneratorLabel::X: terms.push_back({-1.0, {{i, Axis::X}}}); break;
      case GeneratorLabel::Z: terms.push_back({-1.0, {{i, Axis::Z}}}); break;
      case GeneratorLabel::ZZZ: terms.push_back({-1.0, {{i, Axis::Z}, {j, Axis::Z}, {(i + 2) % n, Axis::Z}}}); break;
      case GeneratorLabel::XXYY:
        terms.push_back({-1.0, {{i, Axis::X}, {j, Axis::X}}});
        terms.push_back({-1.0, {{i, Axis::Y}, {j, Axis::Y}}});
        break;
    }
  }
  return custom_model(n, std::move(terms));
}

void apply_layer(StateVector& state, GeneratorLabel label, double theta) {
  if (!std::isfinite(theta)) {
    throw ConfigError("layer angle must be finite");
  }
  if (state.n_spins() < minimum_spins(label)) {
    throw ConfigError("generator " + std::string(to_string(label)) + " needs at least " +
                      std::to_string(minimum_spins(label)) + " spins");
  }
  switch (label) {
    case GeneratorLabel::ZZ:
    case GeneratorLabel::Z:
    case GeneratorLabel::ZZZ: apply_diagonal(state, label, theta); break;
    case GeneratorLabel::X: apply_x(state, theta); break;
    case GeneratorLabel::XXYY: apply_hopping(state, theta); break;
  }
}

StateVector product_state_x(int n_spins, int direction) {
  if (direction != 1 && direction != -1) {
    throw ConfigError("x-polarization direction must be +1 or -1");
  }
  const std::uint64_t dim = dimension_for(n_spins);
  const double a = 1.0 / std::sqrt(static_cast<double>(dim));
  Eigen::VectorXcd v(static_cast<Eigen::Index>(dim));
  for (std::uint64_t b = 0; b < dim; ++b) {
    const bool odd = direction < 0 && (std::popcount(b) & 1);
    v[static_cast<Eigen::Index>(b)] = odd ? -a : a;
  }
  return StateVector(n_spins, std::move(v));
}

int down_count_for(int n_spins, int magnetization) {
  if (std::abs(magnetization) > n_spins || ((n_spins - magnetization) % 2) != 0) {
    throw ConfigError("magnetization " + std::to_string(magnetization) + " is not reachable with " +
                      std::to_string(n_spins) + " spins");
  }
  return (n_spins - magnetization) / 2;
}

StateVector xxyy_sector_ground(int n_spins, int magnetization) {
  if (n_spins < 2) {
    throw ConfigError("hopping sector ground state needs at least 2 spins");
  }
  const int downs = down_count_for(n_spins, magnetization);
  const auto& sector = hopping_sectors(n_spins)[static_cast<std::size_t>(downs)];
  if (sector.indices.empty()) {
    throw ConfigError("empty magnetization sector");
  }
  Eigen::VectorXd ground = sector.vectors.col(0);
  for (Eigen::Index k = 0; k < ground.size(); ++k) {
    if (std::abs(ground[k]) > 1e-12) {
      if (ground[k] < 0) ground = -ground;
      break;
    }
  }
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(dimension_for(n_spins)));
  for (std::size_t k = 0; k < sector.indices.size(); ++k) {
    v[static_cast<Eigen::Index>(sector.indices[k])] = ground[static_cast<Eigen::Index>(k)];
  }
  return StateVector(n_spins, std::move(v));
}

double fidelity(const StateVector& state, const StateVector& target) {
  return std::norm(target.inner(state));
}

double fidelity(const StateVector& state, const GroundSpace& target) {
  double f = 0.0;
  for (const auto& v : target.basis) f += std::norm(v.inner(state));
  return f;
}

double energy(const StateVector& state, const SpinChainModel& model) {
  if (state.n_spins() != model.n_spins) {
    throw ConfigError("state and model sizes differ");
  }
  const Eigen::VectorXcd h_psi = apply_model(model, state.amplitudes());
  return state.amplitudes().dot(h_psi).real();
}

}  // namespace qaoalab
