#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "brute_force.hpp"
#include "stosqp/bench/cli.hpp"
#include "stosqp/bench/config.hpp"
#include "stosqp/bench/pps.hpp"
#include "stosqp/bench/synthetic.hpp"
#include "stosqp/bench/truncated_normal.hpp"

using namespace stosqp;
using namespace stosqp::bench;

TEST(Pps, InstanceValues) {
  const PpsInstance inst = build_pps_instance();
  EXPECT_EQ(inst.factories, 5);
  EXPECT_EQ(inst.stores, 5);
  EXPECT_DOUBLE_EQ(inst.first_stage_cost, 4.2);
  const double c2[] = {2.2, 3.2, 3.3, 4.2, 2.4};
  for (int i = 0; i < 5; ++i) EXPECT_DOUBLE_EQ(inst.production_costs(i), c2[i]);
  EXPECT_TRUE((inst.shipment_costs.array() == 2.0).all());
  EXPECT_DOUBLE_EQ(inst.demand_slope0, -1.0);
  EXPECT_DOUBLE_EQ(inst.demand_intercept0, 12.0);
  const double slope_lo[] = {-1.5, -2.0, -2.5, -3.0, -2.5};
  const double icpt_lo[] = {16.0, 21.0, 26.0, 31.0, 26.0};
  for (int j = 0; j < 5; ++j) {
    EXPECT_DOUBLE_EQ(inst.slope_intervals[j].lo, slope_lo[j]);
    EXPECT_DOUBLE_EQ(inst.slope_intervals[j].hi, slope_lo[j] + 1.0);
    EXPECT_DOUBLE_EQ(inst.intercept_intervals[j].lo, icpt_lo[j]);
    EXPECT_DOUBLE_EQ(inst.intercept_intervals[j].hi, icpt_lo[j] + 1.0);
  }
  EXPECT_DOUBLE_EQ(inst.price_bounds.lo, 1.0);
  EXPECT_DOUBLE_EQ(inst.price_bounds.hi, 10.0);
}

TEST(Pps, FeasibleSet) {
  const auto inst = build_pps_instance();
  const BoxPolyhedron set = pps_feasible_set(inst);
  EXPECT_TRUE(set.contains((Vector(2) << 1.5, 1.5).finished()));
  EXPECT_TRUE(set.contains((Vector(2) << 2.0, 10.0).finished()));
  EXPECT_FALSE(set.contains((Vector(2) << 2.5, 10.0).finished()));  // x > -p + 12
  EXPECT_FALSE(set.contains((Vector(2) << 0.5, 5.0).finished()));
  EXPECT_FALSE(set.contains((Vector(2) << 2.0, 0.5).finished()));
}

TEST(Pps, ScenarioEncodingRoundTrips) {
  PpsScenario s{(Vector(2) << -1.0, -2.0).finished(), (Vector(2) << 16.5, 21.5).finished()};
  const PpsScenario back = decode(encode(s), 2);
  EXPECT_EQ(back.slopes, s.slopes);
  EXPECT_EQ(back.intercepts, s.intercepts);
}

TEST(Pps, ScenariosStayInSupport) {
  const auto inst = build_pps_instance();
  CounterRng rng(derive_stream_key(11, 0));
  for (const auto& payload : sample_pps_scenarios(inst, rng, 500)) {
    const PpsScenario s = decode(payload, inst.stores);
    for (int j = 0; j < inst.stores; ++j) {
      EXPECT_GE(s.slopes(j), inst.slope_intervals[j].lo);
      EXPECT_LE(s.slopes(j), inst.slope_intervals[j].hi);
      EXPECT_GE(s.intercepts(j), inst.intercept_intervals[j].lo);
      EXPECT_LE(s.intercepts(j), inst.intercept_intervals[j].hi);
    }
  }
}

TEST(Pps, OracleGradientMatchesFiniteDifferences) {
  const auto inst = build_pps_instance();
  CounterRng rng(derive_stream_key(3, 0));
  const auto batch = sample_pps_scenarios(inst, rng, 20);
  const double h = 1e-5;
  int compared = 0;
  for (const auto& payload : batch) {
    for (double p : {1.7, 3.3, 5.1, 7.9, 9.4}) {
      const Vector z = (Vector(2) << 2.0, p).finished();
      const OracleValue at = pps_oracle(inst, z, payload);
      const Vector e0 = (Vector(2) << h, 0.0).finished();
      const Vector e1 = (Vector(2) << 0.0, h).finished();
      const double fwd = (pps_oracle(inst, z + e1, payload).value - at.value) / h;
      const double bwd = (at.value - pps_oracle(inst, z - e1, payload).value) / h;
      if (std::abs(fwd - bwd) > 1e-2) continue;  // a kink sits within h; smooth pieces differ by O(h)
      EXPECT_NEAR(at.subgradient(1), 0.5 * (fwd + bwd), 1e-4) << p;
      EXPECT_NEAR(at.subgradient(0), (pps_oracle(inst, z + e0, payload).value - at.value) / h, 1e-4);
      ++compared;
    }
  }
  EXPECT_GT(compared, 80);
}

TEST(Pps, SecondStageLpMatchesVertexEnumerationOnSmallCopy) {
  // One factory and one store keeps the LP small enough to enumerate.
  PpsInstance inst = build_pps_instance();
  inst.factories = 1;
  inst.stores = 1;
  inst.production_costs = Vector::Constant(1, 2.2);
  inst.shipment_costs = Matrix::Constant(1, 1, 2.0);
  inst.slope_intervals.resize(1);
  inst.intercept_intervals.resize(1);
  const PpsScenario s{Vector::Constant(1, -1.0), Vector::Constant(1, 16.5)};
  for (double p : {1.0, 3.0, 4.2, 6.0, 9.5}) {
    // variables (y, z); z <= -p + 16.5, z - y <= 0, 1 <= y <= 100, 0 <= z <= 100
    LpProblem lp;
    lp.cost = (Vector(2) << 2.2, 2.0 - p).finished();
    lp.ineq_matrix = (Matrix(2, 2) << 0.0, 1.0, -1.0, 1.0).finished();
    lp.ineq_rhs = (Vector(2) << 16.5 - p, 0.0).finished();
    lp.lower = (Vector(2) << 1.0, 0.0).finished();
    lp.upper = Vector::Constant(2, 100.0);
    const auto best = oracle::lp_vertex_enumeration(lp);
    ASSERT_TRUE(best.has_value());
    EXPECT_NEAR(solve_second_stage(inst, p, s).value, *best, 1e-9) << p;
  }
}

TEST(Pps, SecondStageIsAffineOnSupport) {
  const auto inst = build_pps_instance();
  for (double p = 1.0; p <= 10.0; p += 0.5) EXPECT_TRUE(second_stage_affine_on_support(inst, p)) << p;
}

TEST(Pps, ExpectedOracleMatchesLargeBatch) {
  const auto inst = build_pps_instance();
  const PpsReference reference(inst);
  const double n = reference.scenarios().size();
  for (double p : {2.0, 4.5, 7.0}) {
    const Vector z = (Vector(2) << 2.0, p).finished();
    double v_sum = 0.0, v_sq = 0.0, g_sum = 0.0, g_sq = 0.0;
    for (const auto& s : reference.scenarios()) {
      const OracleValue o = pps_oracle(inst, z, encode(s));
      v_sum += o.value;
      v_sq += o.value * o.value;
      g_sum += o.subgradient(1);
      g_sq += o.subgradient(1) * o.subgradient(1);
    }
    const double v_se = 1e-9 + std::sqrt(std::max(0.0, v_sq / n - (v_sum / n) * (v_sum / n)) / n);
    const double g_se = 1e-9 + std::sqrt(std::max(0.0, g_sq / n - (g_sum / n) * (g_sum / n)) / n);
    const OracleValue exact = pps_expected_oracle(inst, z);
    const OracleValue batch = reference.expected(z);
    EXPECT_NEAR(batch.value, v_sum / n, 1e-9 * std::abs(batch.value));
    EXPECT_NEAR(exact.value, batch.value, 4.0 * v_se) << p;
    EXPECT_NEAR(exact.subgradient(1), batch.subgradient(1), 4.0 * g_se) << p;
  }
}

TEST(Pps, CurveShape) {
  const PpsReference reference(build_pps_instance(), kReferenceSeed, 50);
  const auto curve = pps_curve(reference, 11);
  ASSERT_EQ(curve.size(), 11u);
  EXPECT_DOUBLE_EQ(curve.front().price, 1.0);
  EXPECT_DOUBLE_EQ(curve.back().price, 10.0);
}

TEST(TruncatedNormalLaw, MomentsMatchQuadrature) {
  const TruncatedNormal law = TruncatedNormal::on_interval(-2.0, -1.0);
  const double mass = oracle::simpson([&](double t) { return law.density(t); }, -2.0, -1.0, 2000);
  EXPECT_NEAR(mass, 1.0, 1e-10);
  const double mean = oracle::simpson([&](double t) { return t * law.density(t); }, -2.0, -1.0, 2000);
  const double var =
      oracle::simpson([&](double t) { return (t - mean) * (t - mean) * law.density(t); }, -2.0, -1.0, 2000);

  CounterRng rng(derive_stream_key(77, 0));
  const int draws = 1000000;
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < draws; ++i) {
    const double t = sample_truncated_normal(law, rng);
    ASSERT_GE(t, -2.0);
    ASSERT_LE(t, -1.0);
    sum += t;
    sum_sq += t * t;
  }
  const double m = sum / draws;
  const double v = sum_sq / draws - m * m;
  EXPECT_LE(std::abs(m - mean), 3.0 * std::sqrt(var / draws));
  EXPECT_NEAR(v / var, 1.0, 0.02);
  EXPECT_EQ(truncated_normal_fallbacks(), 0);
}

TEST(Synthetic, GapBoundAndSharpness) {
  const auto spec = crossing_pieces_spec((Vector(2) << 4.0, 1.0).finished());
  const auto set = BoxPolyhedron::box(Vector::Constant(2, -2.0), Vector::Constant(2, 2.0));
  const double est = suggest_rho([&](const Vector& x) { return spec.value(x); },
                                 [&](const Vector& x) { return spec.subgradient(x); }, set, 20000, 4);
  EXPECT_LE(est, spec.rho + 1e-9);
  EXPECT_GT(est, 0.5 * spec.rho);
}

TEST(Synthetic, ExpectedOracleIsExact) {
  const auto spec = crossing_pieces_spec((Vector(2) << 2.0, 1.0).finished());
  const auto problem =
      build_synthetic_uc2(spec, 0.5, BoxPolyhedron::box(Vector::Constant(2, -2.0), Vector::Constant(2, 2.0)));
  const Vector x = (Vector(2) << 0.7, -0.4).finished();
  CounterRng rng(derive_stream_key(2, 0));
  const auto batch = problem.sampler(rng, 200000);
  double mean = 0.0;
  for (const auto& xi : batch) mean += problem.oracle(x, xi).value;
  mean /= batch.size();
  EXPECT_NEAR(mean, (*problem.expected)(x).value, 5e-3);
  EXPECT_DOUBLE_EQ((*problem.expected)(x).value, spec.value(x));
}

TEST(Synthetic, AbsEqualityExpectation) {
  const double w = 0.2;
  for (double x1 : {-0.5, 0.05, 0.1, 1.3}) {
    const double quad =
        oracle::simpson([&](double xi) { return -std::abs(x1 - xi) / (2.0 * w); }, -w, w, 4000);
    EXPECT_NEAR(abs_equality_expected(x1, w), quad, 1e-6) << x1;
  }
}

TEST(Config, RejectsUnknownField) {
  try {
    parse_run_config(R"({"problem": "pps", "bogus": 1})");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.path(), "$.bogus");
  }
}

TEST(Config, ReportsTypeErrorsWithPath) {
  try {
    parse_run_config(R"({"budget": "lots"})");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.path(), "$.budget");
  }
}

TEST(Config, ParsesFields) {
  const RunConfig cfg = parse_run_config(
      R"({"problem": "abs_equality", "strategy": "fixed:50", "budget": 1000, "x0": [0.5, 0.5], "seed": 4})");
  EXPECT_EQ(cfg.problem, ProblemKind::AbsEquality);
  EXPECT_EQ(cfg.strategy, "fixed:50");
  EXPECT_EQ(cfg.budget, 1000);
  ASSERT_TRUE(cfg.x0.has_value());
  EXPECT_EQ(cfg.x0->size(), 2u);
  EXPECT_EQ(cfg.seed, 4u);
}

TEST(Cli, MissingConfigIsAConfigError) {
  std::ostringstream out, err;
  EXPECT_EQ(cli_main({"run", "definitely_missing.json"}, out, err), 2);
  EXPECT_EQ(err.str().rfind("error: kind=config", 0), 0u) << err.str();
}

TEST(Cli, UnknownSubcommandIsUsageError) {
  std::ostringstream out, err;
  EXPECT_EQ(cli_main({"frobnicate"}, out, err), 2);
  EXPECT_EQ(err.str().rfind("error: kind=usage", 0), 0u) << err.str();
}

TEST(Cli, RunWritesTraceFiles) {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "stosqp_cli_run";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const fs::path cfg = dir / "cfg.json";
  std::ofstream(cfg) << R"({"problem": "abs_equality", "strategy": "fixed:20", "budget": 400, "alpha0": 1.0,
                           "run_id": "abs", "epoch": 100})";
  std::ostringstream out, err;
  ASSERT_EQ(cli_main({"run", cfg.string(), "--out", dir.string()}, out, err), 0) << err.str();
  EXPECT_TRUE(fs::exists(dir / "abs_trace.csv"));
  EXPECT_TRUE(fs::exists(dir / "abs_epochs.csv"));
  fs::remove_all(dir);
}

TEST(Cli, SelftestPasses) {
  std::ostringstream out, err;
  EXPECT_EQ(cli_main({"selftest"}, out, err), 0) << out.str();
}
