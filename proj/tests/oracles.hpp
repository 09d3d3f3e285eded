#pragma once

// Reference constructions written independently of the library: explicit Kronecker
// products, dense exponentials, and closed forms.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <string>
#include <vector>

namespace oracle {

using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using cplx = std::complex<double>;

inline Matrix pauli(char axis) {
  Matrix m(2, 2);
  switch (axis) {
    case 'X': m << 0, 1, 1, 0; break;
    case 'Y': m << 0, cplx(0, -1), cplx(0, 1), 0; break;
    case 'Z': m << 1, 0, 0, -1; break;
    default: m = Matrix::Identity(2, 2);
  }
  return m;
}

inline Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

/// Product of single-site Paulis; site 0 is the least significant bit, so it is the
/// rightmost Kronecker factor.
inline Matrix string_op(int n, const std::map<int, char>& ops) {
  Matrix out = Matrix::Identity(1, 1);
  for (int site = n - 1; site >= 0; --site) {
    auto it = ops.find(site);
    out = kron(out, pauli(it == ops.end() ? 'I' : it->second));
  }
  return out;
}

/// -J sum Z_i Z_{i+1} - hx sum X_i - hz sum Z_i on a ring (J = +1 FM, -1 AFM).
inline Matrix ising(int n, double j, double hx, double hz) {
  const long dim = 1L << n;
  Matrix h = Matrix::Zero(dim, dim);
  for (int i = 0; i < n; ++i) {
    h -= j * string_op(n, {{i, 'Z'}, {(i + 1) % n, 'Z'}});
    h -= hx * string_op(n, {{i, 'X'}});
    h -= hz * string_op(n, {{i, 'Z'}});
  }
  return h;
}

inline Matrix three_spin(int n, double hx, double hz) {
  const long dim = 1L << n;
  Matrix h = Matrix::Zero(dim, dim);
  for (int i = 0; i < n; ++i) {
    h -= string_op(n, {{i, 'Z'}, {(i + 1) % n, 'Z'}, {(i + 2) % n, 'Z'}});
    h -= hx * string_op(n, {{i, 'X'}});
    h -= hz * string_op(n, {{i, 'Z'}});
  }
  return h;
}

/// Generator matrices by name: "ZZ", "X", "Z", "ZZZ", "XXYY".
inline Matrix generator(const std::string& name, int n) {
  const long dim = 1L << n;
  Matrix h = Matrix::Zero(dim, dim);
  for (int i = 0; i < n; ++i) {
    const int a = (i + 1) % n;
    const int b = (i + 2) % n;
    if (name == "ZZ") h -= string_op(n, {{i, 'Z'}, {a, 'Z'}});
    if (name == "X") h -= string_op(n, {{i, 'X'}});
    if (name == "Z") h -= string_op(n, {{i, 'Z'}});
    if (name == "ZZZ") h -= string_op(n, {{i, 'Z'}, {a, 'Z'}, {b, 'Z'}});
    if (name == "XXYY") h -= string_op(n, {{i, 'X'}, {a, 'X'}}) + string_op(n, {{i, 'Y'}, {a, 'Y'}});
  }
  return h;
}

/// exp(-i t H) for Hermitian H through its eigendecomposition.
inline Matrix expm(const Matrix& h, double t) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  const Eigen::VectorXd& w = es.eigenvalues();
  Vector phases(w.size());
  for (Eigen::Index k = 0; k < w.size(); ++k) phases[k] = std::exp(cplx(0, -t * w[k]));
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

inline Eigen::VectorXd eigenvalues(const Matrix& h) { return Eigen::SelfAdjointEigenSolver<Matrix>(h).eigenvalues(); }

/// Ground energy of -sum Z Z - h sum X on an even ring: the Jordan-Wigner fermions of the
/// even-parity sector take antiperiodic momenta k = (2m+1) pi / N.
inline double free_fermion_ground_energy(int n, double h) {
  double e = 0.0;
  for (int m = 0; m < n; ++m) {
    const double k = (2 * m + 1) * std::numbers::pi / n;
    e -= std::sqrt(1.0 + h * h - 2.0 * h * std::cos(k));
  }
  return e;
}

/// Reduced-density-matrix eigenvalues for the cut {0..cut-1}, descending.
inline std::vector<double> schmidt_probabilities(const Vector& psi, int n, int cut) {
  const long left = 1L << cut;
  const long right = 1L << (n - cut);
  Matrix rho = Matrix::Zero(left, left);
  for (long a = 0; a < left; ++a)
    for (long b = 0; b < left; ++b) {
      cplx s = 0;
      for (long r = 0; r < right; ++r) s += psi[r * left + a] * std::conj(psi[r * left + b]);
      rho(a, b) = s;
    }
  std::vector<double> out;
  const Eigen::VectorXd w = eigenvalues(rho);
  for (Eigen::Index k = w.size() - 1; k >= 0; --k) out.push_back(std::max(0.0, w[k]));
  return out;
}

inline Vector random_state(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Vector v(1L << n);
  for (auto& a : v) a = cplx(g(rng), g(rng));
  return v / v.norm();
}

/// Brute-force minimum over a uniform grid of [lo, hi]^dim.
inline double grid_minimum(const std::function<double(const std::vector<double>&)>& f, int dim, double lo, double hi,
                           int steps) {
  std::vector<int> idx(dim, 0);
  std::vector<double> x(dim);
  double best = INFINITY;
  while (true) {
    for (int d = 0; d < dim; ++d) x[d] = lo + (hi - lo) * idx[d] / (steps - 1);
    best = std::min(best, f(x));
    int d = 0;
    while (d < dim && ++idx[d] == steps) idx[d++] = 0;
    if (d == dim) break;
  }
  return best;
}

/// Every Fock-pattern probability exp(-sum e_j n_j)/Z, sorted descending.
inline std::vector<double> gaussian(const std::vector<double>& e) {
  const int m = static_cast<int>(e.size());
  std::vector<double> w(1u << m);
  double z = 0.0;
  for (unsigned pat = 0; pat < w.size(); ++pat) {
    double s = 0.0;
    for (int j = 0; j < m; ++j)
      if (pat >> j & 1u) s += e[j];
    w[pat] = std::exp(-s);
    z += w[pat];
  }
  for (auto& v : w) v /= z;
  std::sort(w.rbegin(), w.rend());
  return w;
}

inline double half_l1(std::vector<double> p, std::vector<double> q) {
  std::sort(p.rbegin(), p.rend());
  std::sort(q.rbegin(), q.rend());
  const std::size_t n = std::max(p.size(), q.size());
  p.resize(n, 0.0);
  q.resize(n, 0.0);
  double s = 0.0;
  for (std::size_t k = 0; k < n; ++k) s += std::abs(p[k] - q[k]);
  return 0.5 * s;
}

}  // namespace oracle
