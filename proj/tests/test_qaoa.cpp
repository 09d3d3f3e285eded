#include "oracles.hpp"

#include "qaoalab/errors.hpp"
#include "qaoalab/optimize.hpp"
#include "qaoalab/qaoa.hpp"

#include <doctest.h>

#include <numbers>
#include <random>

using namespace qaoalab;

namespace {

constexpr double kPi = std::numbers::pi;

CostTarget full_target(const SpinChainModel& model) {
  const ExactSolution s = solve_exact(model);
  CostTarget t;
  t.fidelity = s.ground;
  t.energies = EnergyRange{s.e_min, s.e_max};
  t.cut = model.n_spins / 2;
  t.spectrum = entanglement_spectrum(representative_state(s.ground, DegenerateChoice::Symmetric), t.cut);
  return t;
}

}  // namespace

TEST_CASE("zero angles leave the initial state alone") {
  const Protocol p = make_protocol("ising3", 1, {});
  const StateVector s = evolve(p, AngleSchedule(1, 3), 4);
  CHECK((s.amplitudes() - product_state_x(4, 1).amplitudes()).norm() == 0.0);
}

TEST_CASE("circuit matches a product of dense exponentials") {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.0, kPi);
  const int n = 4;
  const Protocol p = make_protocol("ising3", 2, {});
  AngleSchedule theta(2, 3);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 3; ++j) theta(i, j) = u(rng);
  Eigen::VectorXcd psi = product_state_x(n, 1).amplitudes();
  const char* names[] = {"ZZ", "X", "Z"};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 3; ++j) psi = oracle::expm(oracle::generator(names[j], n), theta(i, j)) * psi;
  CHECK((evolve(p, theta, n).amplitudes() - psi).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("cost extremes") {
  const auto model = build_model(Family::AfmIsing, 4, 0.9, 0.4);
  const CostTarget t = full_target(model);
  const Protocol p = make_protocol("ising3", 1, {});
  const CostFunction inf(p, model, CostKind::Infidelity, t);
  const CostFunction rel(p, model, CostKind::RelativeEnergy, t);
  const CostFunction ent(p, model, CostKind::RelativeEntropy, t);
  const StateVector ground = std::get<GroundSpace>(*t.fidelity).basis.front();
  CHECK(inf.of_state(ground) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(rel.of_state(ground) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(ent.of_state(ground) == doctest::Approx(0.0).epsilon(1e-9));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(to_dense(model));
  const StateVector top(4, es.eigenvectors().col(15));
  CHECK(rel.of_state(top) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("costs stay in range for random schedules") {
  std::mt19937_64 rng(41);
  const auto model = build_model(Family::FmIsing, 5, 0.6, 0.7);
  const CostTarget t = full_target(model);
  const Protocol p = make_protocol("ising3", 2, {});
  const CostFunction inf(p, model, CostKind::Infidelity, t);
  const CostFunction rel(p, model, CostKind::RelativeEnergy, t);
  const CostFunction ent(p, model, CostKind::RelativeEntropy, t);
  for (int k = 0; k < 200; ++k) {
    const AngleSchedule s = random_schedule(p, rng);
    const double a = inf(s);
    const double b = rel(s);
    CHECK((a >= 0.0 && a <= 1.0));
    CHECK((b >= 0.0 && b <= 1.0));
    CHECK(ent(s) >= 0.0);
  }
}

TEST_CASE("evolution is bit-for-bit deterministic") {
  const Protocol p = make_protocol("threespin3", 2, {});
  AngleSchedule s(2, 3);
  s(0, 0) = 0.3;
  s(0, 1) = 1.1;
  s(1, 2) = 2.7;
  const StateVector a = evolve(p, s, 6);
  const StateVector b = evolve(p, s, 6);
  CHECK(a.amplitudes() == b.amplitudes());
}

TEST_CASE("spectral relative entropy") {
  const auto p = ProbabilitySpectrum::from_values({0.5, 0.3, 0.2});
  const auto q = ProbabilitySpectrum::from_values({0.4, 0.4, 0.2});
  CHECK(spectral_relative_entropy(p, p) == doctest::Approx(0.0).epsilon(1e-14));
  const double expected = 0.5 * std::log(0.5 / 0.4) + 0.3 * std::log(0.3 / 0.4);
  CHECK(spectral_relative_entropy(p, q) == doctest::Approx(expected).epsilon(1e-12));
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 100; ++k) {
    const auto a = ProbabilitySpectrum::from_values({u(rng), u(rng), u(rng), u(rng)});
    const auto b = ProbabilitySpectrum::from_values({u(rng), u(rng), u(rng), u(rng)});
    CHECK(spectral_relative_entropy(a, b) >= 0.0);
  }
}

TEST_CASE("angle reduction") {
  const Protocol p = make_protocol("ising3", 1, {});
  AngleSchedule s(1, 3);
  s(0, 0) = kPi / 2 + 0.2;
  s(0, 1) = kPi + 0.3;
  s(0, 2) = -0.1;
  const AngleSchedule r = reduce_angles(s, p);
  CHECK(r(0, 0) == doctest::Approx(0.2));
  CHECK(r(0, 1) == doctest::Approx(0.3));
  CHECK(r(0, 2) == doctest::Approx(kPi - 0.1));

  const Protocol appendix = make_protocol("appendix2", 1, default_initial("appendix2", 6));
  CHECK(appendix.domain_length(0) == doctest::Approx(kPi / 2));
  CHECK(appendix.domain_length(1) == 0.0);
  CHECK(make_protocol("threespin3", 1, {}).domain_length(0) == doctest::Approx(kPi));
  AngleSchedule big(1, 2);
  big(0, 1) = 7.5;
  CHECK(reduce_angles(big, appendix)(0, 1) == 7.5);
}

TEST_CASE("reduced schedules prepare the same state up to phase") {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  for (const char* name : {"ising3", "threespin3", "appendix2"}) {
    const Protocol p = make_protocol(name, 2, default_initial(name, 6));
    AngleSchedule s(2, p.generator_count());
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < p.generator_count(); ++j) s(i, j) = u(rng);
    CHECK(fidelity(evolve(p, s, 6), evolve(p, reduce_angles(s, p), 6)) == doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("total time") {
  CHECK(total_time(AngleSchedule(2, 3)) == 0.0);
  AngleSchedule s(2, 3);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 3; ++j) s(i, j) = 0.5;
  CHECK(total_time(s) == doctest::Approx(3.0));
}

TEST_CASE("parity-flip operator identity on random states") {
  std::mt19937_64 rng(314);
  std::uniform_real_distribution<double> u(-kPi, kPi);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + trial % 5;
    const StateVector psi(n, oracle::random_state(n, rng));
    const double t2 = u(rng);
    const double t3 = u(rng);
    StateVector lhs = psi;
    apply_layer(lhs, GeneratorLabel::X, t2);
    apply_layer(lhs, GeneratorLabel::Z, t3 + kPi / 2);
    // prod Z_i |psi>
    Eigen::VectorXcd flipped = psi.amplitudes();
    for (Eigen::Index b = 0; b < flipped.size(); ++b)
      if (std::popcount(static_cast<unsigned>(b)) % 2) flipped[b] = -flipped[b];
    StateVector rhs(n, flipped);
    apply_layer(rhs, GeneratorLabel::X, -t2);
    apply_layer(rhs, GeneratorLabel::Z, t3);
    CHECK(fidelity(lhs, rhs) == doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("parity canonicalization keeps the state") {
  std::mt19937_64 rng(55);
  std::uniform_real_distribution<double> u(0.0, kPi);
  for (int trial = 0; trial < 50; ++trial) {
    const Protocol p = make_protocol("ising3", 3, {trial % 2 ? InitialKind::XMinus : InitialKind::XPlus, 0});
    AngleSchedule s(3, 3);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) s(i, j) = u(rng);
    const auto [q, c] = canonicalize_parity(p, s);
    for (int i = 0; i < 3; ++i) CHECK(c(i, 2) < kPi / 2);
    CHECK(fidelity(evolve(p, s, 5), evolve(q, c, 5)) == doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("without a longitudinal field the Z column is unnecessary") {
  const int n = 4;
  const auto model = build_model(Family::FmIsing, n, 0.8, 0.0);
  CostTarget t;
  t.fidelity = solve_exact(model).ground;
  const CostFunction two(make_protocol("ising2", n / 2, {}), model, CostKind::Infidelity, t);
  std::mt19937_64 rng(4);
  SequentialOptions options;
  options.hopping.hops = 20;
  options.hopping.seed = 9;
  const auto results = optimize_sequential(two, random_schedule(make_protocol("ising2", 1, {}), rng), options);
  const ScheduleResult& best = results.back();
  CHECK(best.opt.best_cost <= 1e-6);
  Eigen::MatrixXd angles = Eigen::MatrixXd::Zero(n / 2, 3);
  angles.leftCols(2) = best.schedule.matrix();
  const AngleSchedule embedded(angles);
  const CostFunction three(make_protocol("ising3", n / 2, {}), model, CostKind::Infidelity, t);
  CHECK(std::abs(three(embedded) - best.opt.best_cost) < 1e-6);
}

TEST_CASE("protocol validation") {
  CHECK_THROWS_AS(make_protocol("ising4", 1, {}), ConfigError);
  CHECK_THROWS_AS(make_protocol("ising3", 0, {}), ConfigError);
  CHECK_THROWS_AS(evolve(make_protocol("threespin3", 1, {}), AngleSchedule(1, 3), 2), ConfigError);
  CHECK_THROWS_AS(evolve(make_protocol("ising3", 2, {}), AngleSchedule(1, 3), 4), ConfigError);
  CHECK_THROWS_AS(parse_cost_kind("fidelity"), ConfigError);
  const auto model = build_model(Family::FmIsing, 4, 1.0, 0.0);
  CHECK_THROWS_AS(CostFunction(make_protocol("ising3", 1, {}), model, CostKind::Infidelity, {}), ConfigError);
}
