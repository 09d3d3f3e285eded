#include "oracles.hpp"

#include "qaoalab/errors.hpp"
#include "qaoalab/models.hpp"
#include "qaoalab/simulator.hpp"

#include <doctest.h>

#include <algorithm>
#include <random>

using namespace qaoalab;

namespace {

Eigen::MatrixXcd shift_matrix(int n) {
  const auto dim = static_cast<Eigen::Index>(dimension_for(n));
  Eigen::MatrixXcd p = Eigen::MatrixXcd::Zero(dim, dim);
  for (Eigen::Index b = 0; b < dim; ++b) p(static_cast<Eigen::Index>(shift_index(static_cast<std::uint64_t>(b), n)), b) = 1.0;
  return p;
}

oracle::Matrix family_oracle(Family f, int n, double hx, double hz) {
  switch (f) {
    case Family::FmIsing: return oracle::ising(n, 1.0, hx, hz);
    case Family::AfmIsing: return oracle::ising(n, -1.0, hx, hz);
    default: return oracle::three_spin(n, hx, hz);
  }
}

}  // namespace

TEST_CASE("two-site FM ring doubles its single bond") {
  const Eigen::MatrixXcd h = to_dense(build_model(Family::FmIsing, 2, 0.0, 0.0));
  Eigen::VectorXd expected(4);
  expected << -2, 2, 2, -2;
  CHECK((h.diagonal().real() - expected).norm() < 1e-14);
  const Eigen::VectorXd w = oracle::eigenvalues(h);
  CHECK(w[0] == doctest::Approx(-2.0));
  CHECK(w[1] == doctest::Approx(-2.0));
  CHECK(w[2] == doctest::Approx(2.0));
  CHECK(w[3] == doctest::Approx(2.0));
}

TEST_CASE("two-site FM ring with a transverse field") {
  const Eigen::MatrixXcd h = to_dense(build_model(Family::FmIsing, 2, 1.0, 0.0));
  CHECK(h(0, 0).real() == doctest::Approx(-2.0));
  CHECK(h(1, 1).real() == doctest::Approx(2.0));
  CHECK(h(0, 1).real() == doctest::Approx(-1.0));
  CHECK(h(0, 2).real() == doctest::Approx(-1.0));
  CHECK(std::abs(h(0, 3)) == 0.0);
}

TEST_CASE("three-site three-spin ring triples its only triple") {
  const auto model = build_model(Family::ThreeSpin, 3, 0.0, 0.0);
  const GroundSpace g = ground_space(model);
  CHECK(g.energy == doctest::Approx(-3.0));
  CHECK(g.degeneracy() == 4);
}

TEST_CASE("identity-only custom model is a multiple of the identity") {
  const auto model = custom_model(3, {PauliTerm{2.5, {}}});
  const Eigen::MatrixXcd h = to_dense(model);
  CHECK((h - 2.5 * Eigen::MatrixXcd::Identity(8, 8)).norm() < 1e-14);
}

TEST_CASE("dense matrices match the Kronecker-product oracle") {
  const Family families[] = {Family::FmIsing, Family::AfmIsing, Family::ThreeSpin};
  for (Family f : families) {
    for (int n = minimum_spins(f); n <= 6; ++n) {
      CAPTURE(n);
      const Eigen::MatrixXcd h = to_dense(build_model(f, n, 0.7, 0.3));
      CHECK((h - family_oracle(f, n, 0.7, 0.3)).cwiseAbs().maxCoeff() < 1e-13);
    }
  }
}

TEST_CASE("matrix-free application agrees with the dense matrix") {
  std::mt19937_64 rng(5);
  const auto model = build_model(Family::AfmIsing, 5, 0.4, -0.9);
  const Eigen::VectorXcd psi = oracle::random_state(5, rng);
  CHECK((apply_model(model, psi) - to_dense(model) * psi).norm() < 1e-12);
}

TEST_CASE("Hermiticity and translation invariance for random fields") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (Family f : {Family::FmIsing, Family::AfmIsing, Family::ThreeSpin}) {
    for (int n = minimum_spins(f); n <= 8; ++n) {
      CAPTURE(n);
      const Eigen::MatrixXcd h = to_dense(build_model(f, n, u(rng), u(rng)));
      CHECK((h - h.adjoint()).cwiseAbs().maxCoeff() <= 1e-13);
      const Eigen::MatrixXcd p = shift_matrix(n);
      CHECK((h * p - p * h).cwiseAbs().maxCoeff() <= 1e-12);
    }
  }
  const Eigen::MatrixXcd afm = to_dense(build_model(Family::AfmIsing, 4, 0.5, 0.5));
  CHECK((afm - afm.adjoint()).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("FM and AFM spectra coincide without a longitudinal field") {
  for (int n : {4, 6}) {
    for (double hx : {0.3, 1.0, 1.7}) {
      const Eigen::VectorXd a = oracle::eigenvalues(to_dense(build_model(Family::FmIsing, n, hx, 0.0)));
      const Eigen::VectorXd b = oracle::eigenvalues(to_dense(build_model(Family::AfmIsing, n, hx, 0.0)));
      CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-10);
    }
  }
}

TEST_CASE("classical ferromagnet ground space") {
  const GroundSpace g = ground_space(build_model(Family::FmIsing, 4, 0.0, 0.0));
  CHECK(g.energy == doctest::Approx(-4.0));
  REQUIRE(g.degeneracy() == 2);
  // The projector onto the space must be |0000><0000| + |1111><1111|.
  Eigen::MatrixXcd proj = Eigen::MatrixXcd::Zero(16, 16);
  for (const auto& v : g.basis) proj += v.amplitudes() * v.amplitudes().adjoint();
  Eigen::MatrixXcd expected = Eigen::MatrixXcd::Zero(16, 16);
  expected(0, 0) = expected(15, 15) = 1.0;
  CHECK((proj - expected).norm() < 1e-12);
}

TEST_CASE("transverse-field ground energy matches the free-fermion oracle") {
  for (int n : {4, 6, 8}) {
    for (double h : {0.25, 0.5, 1.0, 1.5, 2.0}) {
      CAPTURE(n);
      CAPTURE(h);
      const ExactSolution s = solve_exact(build_model(Family::FmIsing, n, h, 0.0));
      CHECK(std::abs(s.ground.energy - oracle::free_fermion_ground_energy(n, h)) <= 1e-9);
    }
  }
}

TEST_CASE("ground vectors are eigenvectors") {
  for (Family f : {Family::FmIsing, Family::AfmIsing, Family::ThreeSpin}) {
    const auto model = build_model(f, 6, 0.8, 0.6);
    const Eigen::MatrixXcd h = to_dense(model);
    const GroundSpace g = ground_space(model);
    for (const auto& v : g.basis) CHECK((h * v.amplitudes() - g.energy * v.amplitudes()).norm() <= 1e-9);
  }
}

TEST_CASE("extremal energies") {
  const EnergyRange r = extremal_energies(build_model(Family::FmIsing, 2, 0.0, 0.0));
  CHECK(r.e_min == doctest::Approx(-2.0));
  CHECK(r.e_max == doctest::Approx(2.0));
  for (Family f : {Family::FmIsing, Family::AfmIsing}) {
    const EnergyRange z = extremal_energies(build_model(f, 6, 0.0, 0.0));
    CHECK(z.e_max == doctest::Approx(-z.e_min));
  }
  const EnergyRange afm = extremal_energies(build_model(Family::AfmIsing, 6, 1.0, 1.0));
  const Eigen::VectorXd w = oracle::eigenvalues(oracle::ising(6, -1.0, 1.0, 1.0));
  CHECK(std::abs(afm.e_min - w.minCoeff()) < 1e-10);
  CHECK(std::abs(afm.e_max - w.maxCoeff()) < 1e-10);
}

TEST_CASE("three-spin ground space contains the symmetric period-3 state") {
  const int n = 6;
  const GroundSpace g = ground_space(build_model(Family::ThreeSpin, n, 0.0, -1.0));
  CHECK(g.degeneracy() == 3);
  Eigen::VectorXcd sym = Eigen::VectorXcd::Zero(64);
  for (int shift = 0; shift < 3; ++shift) {
    std::uint64_t b = 0;
    for (int i = 0; i < n; ++i)
      if ((i + shift) % 3 != 2) b |= 1ull << i;  // down spins
    sym[static_cast<Eigen::Index>(b)] = 1.0 / std::sqrt(3.0);
  }
  CHECK(fidelity(StateVector(n, sym), g) == doctest::Approx(1.0).epsilon(1e-12));
  const StateVector rep = representative_state(g, DegenerateChoice::Symmetric);
  CHECK(fidelity(rep, StateVector(n, sym)) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("invalid models are rejected") {
  CHECK_THROWS_AS(build_model(Family::FmIsing, 1, 0.0, 0.0), ConfigError);
  CHECK_THROWS_AS(build_model(Family::ThreeSpin, 2, 0.0, 0.0), ConfigError);
  CHECK_THROWS_AS(build_model(Family::FmIsing, 4, NAN, 0.0), ConfigError);
  CHECK_THROWS_AS(custom_model(3, {PauliTerm{1.0, {{0, Axis::X}, {0, Axis::Z}}}}), ConfigError);
  CHECK_THROWS_AS(to_dense(build_model(Family::FmIsing, 6, 1.0, 0.0), 4), ConfigError);
  CHECK_THROWS_AS(parse_family("ladder"), ConfigError);
}

TEST_CASE("state vector basics") {
  const StateVector s = StateVector::basis_state(3, 5);
  CHECK(std::abs(s[5] - complex(1.0)) < 1e-15);
  CHECK(shift_index(0b001, 3) == 0b010);
  CHECK(shift_index(0b100, 3) == 0b001);
  CHECK_THROWS_AS(StateVector(2, Eigen::VectorXcd::Zero(4)), NumericError);
  CHECK_THROWS_AS(StateVector(2, Eigen::VectorXcd::Ones(3)), ConfigError);
  const StateVector t = translate(s);
  CHECK(std::abs(t[shift_index(5, 3)] - complex(1.0)) < 1e-15);
}
