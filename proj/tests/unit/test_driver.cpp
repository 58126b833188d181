#include <gtest/gtest.h>

#include <cmath>

#include "stosqp/bench/synthetic.hpp"
#include "stosqp/diagnostics.hpp"
#include "stosqp/driver.hpp"

using namespace stosqp;
using namespace stosqp::bench;

namespace {

ConstrainedStochasticProblem crossing_problem(double noise) {
  return build_synthetic_uc2(crossing_pieces_spec((Vector(2) << 2.0, 1.0).finished()), noise,
                             BoxPolyhedron::box(Vector::Constant(2, -2.0), Vector::Constant(2, 2.0)));
}

SolverConfig base_config(const ConstrainedStochasticProblem& problem, const Vector& x0) {
  SolverConfig config;
  config.alpha0 = problem.rho_estimate;
  config.strategy = SamplingStrategy::fixed(20);
  config.budget = 4000;
  config.x0 = x0;
  config.master_seed = 3;
  return config;
}

}  // namespace

TEST(Driver, UpdateTheta) {
  const Vector lambda = (Vector(2) << -3.0, 1.0).finished();
  EXPECT_DOUBLE_EQ(update_theta(1.0, lambda, 0.5), 3.5);
  EXPECT_DOUBLE_EQ(update_theta(5.0, lambda, 0.5), 5.0);
  EXPECT_THROW(update_theta(1.0, lambda, 0.0), std::invalid_argument);
}

TEST(Driver, ComputePi) {
  EXPECT_DOUBLE_EQ(compute_pi(0.5, 10.0, 0.0, 3.0, 1), 1.0);
  // ratio 0.5 * 10 / (2 * 3 * 1) = 5/6 -> ceil(log2(6/5)) = 1 -> 1/2
  EXPECT_DOUBLE_EQ(compute_pi(0.5, 10.0, 2.0, 3.0, 1), 0.5);
  // ratio >= 1 -> 1
  EXPECT_DOUBLE_EQ(compute_pi(0.5, 10.0, 1.0, 1.0, 1), 1.0);
  // ratio 1/20 -> ceil(log2 20) = 5
  EXPECT_DOUBLE_EQ(compute_pi(0.5, 1.0, 1.0, 10.0, 1), 1.0 / 32.0);
  for (double ratio_inv : {1.5, 3.0, 7.9, 100.0}) {
    const double pi = compute_pi(1.0 / ratio_inv, 1.0, 1.0, 1.0, 1);
    EXPECT_LE(pi, 1.0 / ratio_inv);
    EXPECT_GT(pi, 0.5 / ratio_inv);
  }
}

TEST(Driver, UpdateAlphaStaysInRange) {
  SolverConfig config;
  config.eta_alpha = 1.5;
  EXPECT_DOUBLE_EQ(update_alpha(10.0, config, 10.0), 10.0);
  config.alpha_rule = AlphaRule::Geometric;
  config.alpha_growth = 1.2;
  EXPECT_DOUBLE_EQ(update_alpha(10.0, config, 10.0), 12.0);
  EXPECT_DOUBLE_EQ(update_alpha(14.0, config, 10.0), 15.0);
  EXPECT_DOUBLE_EQ(update_alpha(15.0, config, 10.0), 15.0);
}

TEST(Driver, LineSearchAcceptsFullStepOnLinearConstraint) {
  const auto problem = make_abs_equality_problem();
  const Vector x = (Vector(2) << 0.5, 0.5).finished();
  const Vector d = (Vector(2) << 0.3, -0.3).finished();
  const auto ls = line_search(problem, x, d, Vector::Constant(1, 0.2), 2.0, 1.0, 0.5);
  EXPECT_DOUBLE_EQ(ls.zeta, 1.0);
  EXPECT_EQ(ls.backtracks, 0);
}

TEST(Driver, ConfigValidation) {
  const auto problem = crossing_problem(0.1);
  SolverConfig config = base_config(problem, Vector::Zero(2));
  EXPECT_NO_THROW(config.validate(problem));
  SolverConfig bad = config;
  bad.x0 = Vector::Constant(2, 3.0);
  EXPECT_THROW(bad.validate(problem), std::invalid_argument);
  bad = config;
  bad.alpha0 = 0.5 * problem.rho_estimate;
  EXPECT_THROW(bad.validate(problem), std::invalid_argument);
  bad = config;
  bad.alpha0 = 2.0 * problem.rho_estimate;
  EXPECT_THROW(bad.validate(problem), std::invalid_argument);
  bad = config;
  bad.eta_beta = 1.0;
  EXPECT_THROW(bad.validate(problem), std::invalid_argument);
  bad = config;
  bad.measure = MeasureMode::EveryIteration;
  EXPECT_THROW(bad.validate(problem), std::invalid_argument);
}

TEST(Driver, EntryPointsCheckForEqualities) {
  const auto crossing = crossing_problem(0.1);
  EXPECT_THROW(run_merit_line_search(crossing, base_config(crossing, Vector::Zero(2))), std::invalid_argument);
  const auto abs = make_abs_equality_problem();
  SolverConfig config = base_config(abs, Vector::Constant(2, 0.5));
  EXPECT_THROW(run_full_step(abs, config), std::invalid_argument);
}

TEST(Driver, FullStepRespectsBudgetAndSet) {
  const auto problem = crossing_problem(0.2);
  SolverConfig config = base_config(problem, (Vector(2) << 0.3, -1.0).finished());
  config.strategy = SamplingStrategy::fixed(30);
  config.budget = 1000;
  const IterationTrace trace = run_full_step(problem, config);
  EXPECT_EQ(trace.stop, StopReason::Budget);
  EXPECT_EQ(trace.records.size(), 33u);  // 33 * 30 = 990, the 34th batch does not fit
  EXPECT_EQ(trace.oracle_calls, 990);
  for (const auto& rec : trace.records) {
    EXPECT_TRUE(problem.set.contains(rec.x));
    EXPECT_EQ(rec.beta, 1.0);
    EXPECT_EQ(rec.zeta, 1.0);
    EXPECT_EQ(rec.theta, 0.0);
  }
  EXPECT_TRUE(problem.set.contains(trace.final_x));
}

TEST(Driver, FullStepConvergesOnSmoothNoiselessProblem) {
  // Single convex piece: minimizer of |x - c|^2 / 2 inside the box.
  bench::QuadraticPiece piece{0.0, (Vector(2) << -0.5, 3.0).finished(), Matrix::Identity(2, 2)};
  const auto spec = SyntheticUc2Spec::from_pieces({piece});
  const auto problem = build_synthetic_uc2(spec, 0.0, BoxPolyhedron::box(Vector::Constant(2, -2.0), Vector::Constant(2, 2.0)));
  SolverConfig config = base_config(problem, Vector::Zero(2));
  config.strategy = SamplingStrategy::fixed(2);
  config.budget = 400;
  const IterationTrace trace = run_full_step(problem, config);
  EXPECT_NEAR(trace.final_x(0), 0.5, 1e-8);
  EXPECT_NEAR(trace.final_x(1), -2.0, 1e-12);
}

TEST(Driver, StallStopsTheRun) {
  bench::QuadraticPiece piece{0.0, Vector::Zero(2), Matrix::Identity(2, 2)};
  const auto problem = build_synthetic_uc2(SyntheticUc2Spec::from_pieces({piece}), 0.0,
                                           BoxPolyhedron::box(Vector::Constant(2, -1.0), Vector::Constant(2, 1.0)));
  SolverConfig config = base_config(problem, Vector::Zero(2));
  config.strategy = SamplingStrategy::fixed(2);
  const IterationTrace trace = run_full_step(problem, config);
  EXPECT_EQ(trace.stop, StopReason::Stall);
  EXPECT_EQ(trace.records.size(), 10u);
}

TEST(Driver, MeritLineSearchTraceInvariants) {
  const auto spec = crossing_pieces_spec(Vector::Constant(2, 8.0));
  const auto problem = make_quadratic_constraint_problem(spec, 0.1);
  SolverConfig config = base_config(problem, (Vector(2) << 1.8, 0.5).finished());
  config.alpha0 = 10.0;
  config.gamma = 1.0;
  config.strategy = SamplingStrategy::fixed(10);
  config.budget = 2000;
  const IterationTrace trace = run_merit_line_search(problem, config);
  ASSERT_FALSE(trace.records.empty());
  double theta = config.theta0;
  for (const auto& rec : trace.records) {
    EXPECT_DOUBLE_EQ(rec.theta, std::max(theta, rec.lambda_inf + config.gamma));
    theta = rec.theta;
    EXPECT_LE(rec.beta, rec.zeta);
    EXPECT_GE(rec.zeta, rec.pi);
    EXPECT_GT(rec.beta, 0.0);
  }
  EXPECT_LE(std::abs(trace.final_x(0) * trace.final_x(0) - 1.0), 1e-6);
}

TEST(Driver, TracesAreDeterministicAcrossWorkers) {
  const auto problem = crossing_problem(0.3);
  SolverConfig config = base_config(problem, (Vector(2) << 0.3, -1.0).finished());
  config.strategy = SamplingStrategy::adaptive(1.0, 200);
  const IterationTrace a = run_full_step(problem, config);
  config.workers = 4;
  const IterationTrace b = run_full_step(problem, config);
  ASSERT_EQ(a.records.size(), b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    EXPECT_EQ(a.records[i].x, b.records[i].x);
    EXPECT_EQ(a.records[i].sample_size, b.records[i].sample_size);
  }
  EXPECT_EQ(a.final_x, b.final_x);
}

TEST(Driver, EpochEndMeasurement) {
  const auto problem = crossing_problem(0.3);
  SolverConfig config = base_config(problem, (Vector(2) << 0.3, -1.0).finished());
  config.strategy = SamplingStrategy::fixed(30);
  config.budget = 1000;
  config.epoch_size = 100;
  config.measure = MeasureMode::EpochEnds;
  config.probe = make_stationarity_probe(problem, [&](const Vector& x) { return (*problem.expected)(x).subgradient; });
  const IterationTrace trace = run_full_step(problem, config);
  for (std::size_t i = 0; i < trace.records.size(); ++i) {
    const auto& rec = trace.records[i];
    const bool last = i + 1 == trace.records.size();
    const bool epoch_end =
        last || i == 0 || epoch_index(rec.oracle_calls + 30, 100) != epoch_index(rec.oracle_calls, 100);
    EXPECT_EQ(!std::isnan(rec.stationarity), epoch_end) << i;
  }
  EXPECT_FALSE(std::isnan(trace.final_stationarity));
}
