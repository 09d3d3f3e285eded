#include "qaoalab/spectra.hpp"

#include "qaoalab/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <random>
#include <sstream>
#include <string>

namespace qaoalab {

namespace {

/// Fills `out` with the unsorted Gaussian weights for the given energies.
void gaussian_weights(std::span<const double> energies, std::vector<double>& out) {
  out.assign(1, 1.0);
  for (double e : energies) {
    const double c = std::clamp(e, -kEnergyClamp, kEnergyClamp);
    const double empty = 1.0 / (1.0 + std::exp(-c));
    const double filled = 1.0 / (1.0 + std::exp(c));
    const std::size_t half = out.size();
    out.resize(2 * half);
    for (std::size_t k = 0; k < half; ++k) {
      out[half + k] = out[k] * filled;
      out[k] *= empty;
    }
  }
}

double sorted_distance(const std::vector<double>& p, const std::vector<double>& q) {
  const std::size_t n = std::max(p.size(), q.size());
  double sum = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double a = k < p.size() ? p[k] : 0.0;
    const double b = k < q.size() ? q[k] : 0.0;
    sum += std::abs(a - b);
  }
  return 0.5 * sum;
}

}  // namespace

ProbabilitySpectrum ProbabilitySpectrum::from_values(std::vector<double> values) {
  double total = 0.0;
  for (double& v : values) {
    if (!std::isfinite(v) || v < -1e-12) {
      throw NumericError("spectrum entries must be finite and non-negative");
    }
    v = std::max(v, 0.0);
    total += v;
  }
  if (!(total > 0.0)) {
    throw NumericError("spectrum is empty or all zero");
  }
  for (double& v : values) v /= total;
  std::sort(values.begin(), values.end(), std::greater<>());
  return ProbabilitySpectrum(std::move(values));
}

ProbabilitySpectrum entanglement_spectrum(const StateVector& state, int cut) {
  const int n = state.n_spins();
  if (cut < 1 || cut >= n) {
    throw ConfigError("cut size " + std::to_string(cut) + " must lie in [1, N)");
  }
  const Eigen::Index rows = Eigen::Index{1} << cut;
  const Eigen::Index cols = Eigen::Index{1} << (n - cut);
  // Column-major: element (a, b) sits at a + 2^cut * b, i.e. a holds the low (cut) sites.
  const Eigen::Map<const Eigen::MatrixXcd> psi(state.amplitudes().data(), rows, cols);
  const Eigen::MatrixXcd gram = rows <= cols ? Eigen::MatrixXcd(psi * psi.adjoint())
                                             : Eigen::MatrixXcd(psi.adjoint() * psi);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(gram, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw NumericError("reduced density matrix diagonalization failed");
  }
  std::vector<double> values(solver.eigenvalues().data(), solver.eigenvalues().data() + solver.eigenvalues().size());
  for (double& v : values) v = std::max(v, 0.0);
  return ProbabilitySpectrum::from_values(std::move(values));
}

double von_neumann_entropy(const ProbabilitySpectrum& spectrum) {
  double s = 0.0;
  for (double p : spectrum.values()) {
    if (p > 0.0) s -= p * std::log(p);
  }
  return s;
}

ProbabilitySpectrum gaussian_spectrum(std::span<const double> energies) {
  std::vector<double> w;
  for (double e : energies) {
    if (std::isnan(e)) throw ConfigError("single-particle energies must not be NaN");
  }
  gaussian_weights(energies, w);
  return ProbabilitySpectrum::from_values(std::move(w));
}

double trace_distance(const ProbabilitySpectrum& p, const ProbabilitySpectrum& q) {
  return sorted_distance(p.values(), q.values());
}

double conjectured_df_bound() { return 3.0 - 2.0 * std::sqrt(2.0); }

std::vector<double> entanglement_energy_seed(const ProbabilitySpectrum& spectrum, int modes) {
  auto xi = [&](std::size_t k) {
    const double p = k < spectrum.size() ? spectrum[k] : 0.0;
    return p > 0.0 ? std::min(-std::log(p), kEnergyClamp) : kEnergyClamp;
  };
  std::vector<double> seed(static_cast<std::size_t>(modes));
  for (std::size_t j = 0; j < seed.size(); ++j) seed[j] = xi(j + 1) - xi(0);
  return seed;
}

InteractionDistance interaction_distance(const ProbabilitySpectrum& spectrum, int modes, const DistanceConfig& config) {
  if (modes < 1 || modes > 20) {
    throw ConfigError("number of free modes must lie in [1, 20]");
  }
  if (spectrum.size() == 0) {
    throw NumericError("empty spectrum");
  }
  if (config.random_starts < 0) {
    throw ConfigError("random start count must be non-negative");
  }
  const std::vector<double>& rho = spectrum.values();
  std::vector<double> scratch;
  Objective objective = [&rho, scratch](std::span<const double> e) mutable {
    gaussian_weights(e, scratch);
    std::sort(scratch.begin(), scratch.end(), std::greater<>());
    return sorted_distance(rho, scratch);
  };

  std::vector<std::vector<double>> starts;
  starts.push_back(entanglement_energy_seed(spectrum, modes));
  std::mt19937_64 rng(derive_seed(config.hopping.seed, {0xD15u}));
  std::uniform_real_distribution<double> uniform(-config.random_range, config.random_range);
  for (int s = 0; s < config.random_starts; ++s) {
    std::vector<double> x(static_cast<std::size_t>(modes));
    for (double& v : x) v = uniform(rng);
    starts.push_back(std::move(x));
  }

  InteractionDistance out;
  out.seed_distance = objective(starts.front());
  out.distance = std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < starts.size(); ++s) {
    BasinHopConfig hop = config.hopping;
    hop.seed = derive_seed(config.hopping.seed, {s});
    const OptResult r = basinhop(objective, starts[s], hop);
    if (r.best_cost < out.distance) {
      out.distance = r.best_cost;
      out.energies = r.best_x;
    }
  }
  for (double& e : out.energies) e = std::clamp(e, -kEnergyClamp, kEnergyClamp);
  out.exceeds_conjectured_bound = out.distance > conjectured_df_bound();
  return out;
}

ProbabilitySpectrum read_spectrum(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot read spectrum file " + path.string());
  }
  std::vector<double> values;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream fields(line);
    double v = 0.0;
    std::string rest;
    if (!(fields >> v) || (fields >> rest)) {
      throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": expected one number per line");
    }
    values.push_back(v);
  }
  return ProbabilitySpectrum::from_values(std::move(values));
}

void write_spectrum(const ProbabilitySpectrum& spectrum, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot write spectrum file " + path.string());
  }
  out << std::setprecision(17);
  for (double v : spectrum.values()) out << v << '\n';
}

}  // namespace qaoalab
