#include "oracles.hpp"

#include "qaoalab/errors.hpp"
#include "qaoalab/experiments.hpp"
#include "qaoalab/optimize.hpp"
#include "qaoalab/simulator.hpp"
#include "qaoalab/spectra.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <bit>
#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

using namespace qaoalab;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Context {
  int threads = 1;
  std::uint64_t seed = 2024;
  /// Every D_F computed by any criterion, for the bound guard.
  std::vector<double> df_values;
  std::optional<SweepOutput> fm6_sweep;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

Outcome exact_free_line(Context& ctx) {
  PointSetup setup;
  setup.n_spins = 8;
  double worst = 0.0;
  std::ostringstream detail;
  for (double hx : {0.5, 1.0, 1.5}) {
    const PreparedPoint point = prepare_point(setup, hx, 0.0);
    const CostFunction cost = make_cost(setup, point, 4);
    std::mt19937_64 rng(derive_seed(ctx.seed, {1, static_cast<std::uint64_t>(hx * 10)}));
    SequentialOptions options;
    options.hopping.seed = derive_seed(ctx.seed, {1, 100 + static_cast<std::uint64_t>(hx * 10)});
    const auto results = optimize_sequential(cost, random_schedule(setup.protocol_for(1), rng), options);
    const double infidelity = results.back().opt.best_cost;
    worst = std::max(worst, infidelity);
    detail << "hx=" << hx << ": 1-f=" << fmt("%.3g", infidelity) << "  ";
  }
  return {worst <= 1e-6, detail.str()};
}

Outcome free_line_df(Context& ctx) {
  double worst = 0.0;
  GridAxis axis;
  axis.count = 8;
  for (Family f : {Family::FmIsing, Family::AfmIsing}) {
    PointSetup setup;
    setup.family = f;
    setup.n_spins = 8;
    for (double hx : axis.values()) {
      const PreparedPoint point = prepare_point(setup, hx, 0.0);
      DistanceConfig distance;
      distance.hopping.seed = derive_seed(ctx.seed, {2, static_cast<std::uint64_t>(hx * 100)});
      const double df = interaction_distance(point.spectrum, 4, distance).distance;
      ctx.df_values.push_back(df);
      worst = std::max(worst, df);
    }
  }
  return {worst <= 1e-6, "max D_F over 16 points = " + fmt("%.3g", worst)};
}

Outcome three_mode_constant(Context& ctx) {
  const auto p = ProbabilitySpectrum::from_values({1.0 / 3, 1.0 / 3, 1.0 / 3, 0, 0, 0, 0, 0});
  const double df = interaction_distance(p, 3).distance;
  ctx.df_values.push_back(df);
  return {std::abs(df - 1.0 / 6) <= 1e-6, "D_F = " + fmt("%.9f", df)};
}

StateVector period_three_state(int n) {
  Eigen::VectorXcd a = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(dimension_for(n)));
  for (int shift = 0; shift < 3; ++shift) {
    std::uint64_t bits = 0;
    for (int i = 0; i < n; ++i)
      if ((i + shift) % 3 != 2) bits |= 1ull << i;
    a[static_cast<Eigen::Index>(bits)] = 1.0;
  }
  return StateVector(n, a);
}

Outcome sector_protocol(Context& ctx) {
  const int n = 6;
  const auto model = build_model(Family::ThreeSpin, n, 0.0, -1.0);
  CostTarget target;
  target.fidelity = period_three_state(n);
  const Protocol protocol = make_protocol("appendix2", 3, {InitialKind::Sector, -n / 3});
  const CostFunction cost(protocol, model, CostKind::Infidelity, target);
  std::mt19937_64 rng(derive_seed(ctx.seed, {4}));
  SequentialOptions options;
  options.hopping.seed = derive_seed(ctx.seed, {4, 1});
  const auto results = optimize_sequential(cost, random_schedule(with_layers(cost, 1).protocol(), rng), options);
  const double infidelity = results.back().opt.best_cost;
  return {infidelity <= 1e-6, "1-f = " + fmt("%.3g", infidelity)};
}

const SweepOutput& fm6_sweep(Context& ctx) {
  if (!ctx.fm6_sweep) {
    SweepConfig config;
    config.setup.n_spins = 6;
    config.layers = 3;
    config.grid = GridSpec::defaults_for(Family::FmIsing, 8);
    config.seed = derive_seed(ctx.seed, {5});
    config.hopping.seed = config.seed;
    config.distance.hopping.seed = config.seed;
    config.threads = ctx.threads;
    ctx.fm6_sweep = sweep(config);
    for (const auto& r : ctx.fm6_sweep->records)
      if (r.ok() && r.p == 1) ctx.df_values.push_back(r.df);
  }
  return *ctx.fm6_sweep;
}

Outcome correlation_trend(Context& ctx) {
  const SweepOutput& out = fm6_sweep(ctx);
  const auto r1 = correlate(out.records, 1).log_r;
  const auto r3 = correlate(out.records, 3).log_r;
  if (!r1 || !r3) return {false, "correlation undefined"};
  return {*r3 >= 0.5 && *r3 > *r1, "r(p=1) = " + fmt("%.4f", *r1) + ", r(p=3) = " + fmt("%.4f", *r3)};
}

PointSetup afm6_energy() {
  PointSetup setup;
  setup.family = Family::AfmIsing;
  setup.n_spins = 6;
  setup.cost = CostKind::RelativeEnergy;
  return setup;
}

std::string epsilons(const std::vector<LandscapeRow>& rows) {
  std::ostringstream s;
  for (const auto& r : rows) s << "T=" << r.budget << ":" << fmt("%.3g", r.epsilon) << " ";
  return s.str();
}

Outcome landscape_at_most(Context& ctx) {
  BasinHopConfig config;
  config.seed = derive_seed(ctx.seed, {6});
  const auto rows = landscape_scan(afm6_energy(), 3, {{1.0, 1.0}}, {0.5, 1.0, 2.0, 4.0, 8.0}, TimeConstraint::AtMost,
                                   config, ctx.threads);
  bool ok = true;
  for (std::size_t k = 1; k < rows.size(); ++k) ok = ok && rows[k].epsilon <= rows[k - 1].epsilon + 1e-6;
  return {ok, epsilons(rows)};
}

Outcome landscape_exactly(Context& ctx) {
  BasinHopConfig config;
  config.seed = derive_seed(ctx.seed, {7});
  std::vector<double> budgets;
  for (int k = 1; k <= 16; ++k) budgets.push_back(0.5 * k);
  const auto rows =
      landscape_scan(afm6_energy(), 3, {{1.0, 1.0}}, budgets, TimeConstraint::Exactly, config, ctx.threads);
  double largest = 0.0;
  for (std::size_t k = 1; k < rows.size(); ++k) largest = std::max(largest, rows[k].epsilon - rows[k - 1].epsilon);
  return {largest > 1e-4, "largest increase = " + fmt("%.3g", largest) + "; " + epsilons(rows)};
}

double worst_fidelity_gap(const StateVector& a, const StateVector& b) { return std::abs(1.0 - fidelity(a, b)); }

Outcome operator_identities(Context& ctx) {
  std::mt19937_64 rng(derive_seed(ctx.seed, {8}));
  std::uniform_real_distribution<double> wide(-4 * kPi, 4 * kPi);
  double reduction = 0.0;
  double parity = 0.0;
  const GeneratorLabel reduced[] = {GeneratorLabel::ZZ, GeneratorLabel::X, GeneratorLabel::Z};
  const double domains[] = {kPi / 2, kPi, kPi};
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + trial % 5;
    const StateVector psi(n, oracle::random_state(n, rng));
    for (int g = 0; g < 3; ++g) {
      const double theta = wide(rng);
      StateVector a = psi;
      StateVector b = psi;
      apply_layer(a, reduced[g], theta);
      apply_layer(b, reduced[g], reduce_angle(theta, domains[g]));
      reduction = std::max(reduction, worst_fidelity_gap(a, b));
    }
    // e^{-i t3' Z} e^{-i t2 X} with t3' = t3 + pi/2 equals e^{-i t3 Z} e^{+i t2 X} on the parity-flipped state.
    const double t2 = wide(rng);
    const double t3 = wide(rng);
    StateVector lhs = psi;
    apply_layer(lhs, GeneratorLabel::X, t2);
    apply_layer(lhs, GeneratorLabel::Z, t3 + kPi / 2);
    Eigen::VectorXcd flipped = psi.amplitudes();
    for (Eigen::Index b = 0; b < flipped.size(); ++b)
      if (std::popcount(static_cast<unsigned>(b)) % 2) flipped[b] = -flipped[b];
    StateVector rhs(n, flipped);
    apply_layer(rhs, GeneratorLabel::X, -t2);
    apply_layer(rhs, GeneratorLabel::Z, t3);
    parity = std::max(parity, worst_fidelity_gap(lhs, rhs));
  }
  return {reduction <= 1e-10 && parity <= 1e-10,
          "max |1-f|: reduction " + fmt("%.3g", reduction) + ", parity flip " + fmt("%.3g", parity)};
}

Outcome oracle_equivalence(Context& ctx) {
  std::mt19937_64 rng(derive_seed(ctx.seed, {9}));
  std::uniform_real_distribution<double> angle(-2 * kPi, 2 * kPi);
  const int n = 4;
  double worst = 0.0;
  std::ostringstream detail;
  for (GeneratorLabel g :
       {GeneratorLabel::ZZ, GeneratorLabel::X, GeneratorLabel::Z, GeneratorLabel::ZZZ, GeneratorLabel::XXYY}) {
    const oracle::Matrix h = oracle::generator(std::string(to_string(g)), n);
    double err = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
      const double theta = angle(rng);
      StateVector s(n, oracle::random_state(n, rng));
      const Eigen::VectorXcd expected = oracle::expm(h, theta) * s.amplitudes();
      apply_layer(s, g, theta);
      err = std::max(err, (s.amplitudes() - expected).cwiseAbs().maxCoeff());
    }
    worst = std::max(worst, err);
    detail << to_string(g) << " " << fmt("%.2g", err) << "  ";
  }
  return {worst <= 1e-10, detail.str()};
}

Outcome epsilon_contrast(Context& ctx) {
  DistributionConfig config;
  config.samples = 1000;
  config.seed = derive_seed(ctx.seed, {10});
  config.threads = ctx.threads;
  const auto weak = epsilon_distribution(afm6_energy(), 3, 0.1, 0.1, config);
  const auto strong = epsilon_distribution(afm6_energy(), 3, 1.0, 1.0, config);
  return {weak.median_log10 < strong.median_log10, "median log10 eps: (0.1,0.1) " + fmt("%.3f", weak.median_log10) +
                                                       ", (1,1) " + fmt("%.3f", strong.median_log10)};
}

Outcome theta3_clustering(Context& ctx) {
  const SweepOutput& out = fm6_sweep(ctx);
  std::vector<SweepRecord> deepest;
  for (const auto& r : out.records)
    if (r.p == 3) deepest.push_back(r);
  const double theta2 = angle_histogram(deepest, 1).near_multiple_fraction;
  const double theta3 = angle_histogram(deepest, 2).near_multiple_fraction;
  return {theta3 > theta2, "near {0, pi/2}: theta_3 " + fmt("%.3f", theta3) + ", theta_2 " + fmt("%.3f", theta2)};
}

Outcome bound_guard(Context& ctx) {
  const double bound = conjectured_df_bound() + 1e-6;
  double largest = 0.0;
  bool in_range = true;
  for (double df : ctx.df_values) {
    largest = std::max(largest, df);
    in_range = in_range && df >= 0.0 && df <= 1.0;
  }
  return {in_range && largest <= bound && !ctx.df_values.empty(),
          std::to_string(ctx.df_values.size()) + " values, max " + fmt("%.6f", largest)};
}

std::set<int> parse_set(const std::string& text) {
  std::set<int> out;
  std::stringstream s(text);
  for (std::string item; std::getline(s, item, ',');)
    if (!item.empty()) out.insert(std::stoi(item));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qaoalab acceptance criteria"};
  std::string only;
  std::string expect_fail;
  Context ctx;
  ctx.threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  app.add_option("--only", only, "comma-separated criteria to run");
  app.add_option("--expect-fail", expect_fail, "comma-separated criteria known to fail");
  app.add_option("--threads", ctx.threads);
  app.add_option("--seed", ctx.seed);
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<int, std::function<Outcome(Context&)>>> criteria = {
      {1, exact_free_line},   {2, free_line_df},       {3, three_mode_constant},     {4, sector_protocol},
      {5, correlation_trend}, {6, landscape_at_most},  {7, landscape_exactly},  {8, operator_identities},
      {9, oracle_equivalence}, {10, epsilon_contrast}, {11, theta3_clustering}, {12, bound_guard}};
  const std::set<int> selected = only.empty() ? std::set<int>{} : parse_set(only);
  const std::set<int> expected = parse_set(expect_fail);

  std::set<int> failed;
  for (const auto& [id, run] : criteria) {
    if (!selected.empty() && !selected.count(id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = run(ctx);
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!o.pass) failed.insert(id);
    std::cout << "criterion " << id << ": " << (o.pass ? "PASS" : "FAIL") << "  " << o.detail << " ["
              << fmt("%.1f", seconds) << " s]" << std::endl;
  }

  std::set<int> expected_run;
  for (int id : expected)
    if (selected.empty() || selected.count(id)) expected_run.insert(id);
  if (failed == expected_run) {
    if (!failed.empty()) std::cout << "all failures are the declared known failures" << std::endl;
    return 0;
  }
  for (int id : failed)
    if (!expected_run.count(id)) std::cout << "unexpected failure: criterion " << id << std::endl;
  for (int id : expected_run)
    if (!failed.count(id)) std::cout << "declared failure now passes: criterion " << id << std::endl;
  return 1;
}
