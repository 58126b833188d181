#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "brute_force.hpp"
#include "stosqp/diagnostics.hpp"

using namespace stosqp;

TEST(Stationarity, ZeroGradientIsStationary) {
  const Matrix a = Matrix::Identity(2, 2);
  EXPECT_EQ(stationarity_error(Vector::Zero(2), Vector::Zero(2), a).residual, 0.0);
}

TEST(Stationarity, InactiveRowsDoNotHelp) {
  const Vector g = (Vector(2) << 1.0, 2.0).finished();
  const auto report = stationarity_error(g, Vector::Constant(2, 0.5), Matrix::Identity(2, 2));
  EXPECT_DOUBLE_EQ(report.residual, g.norm());
  EXPECT_FALSE(report.active_mask[0]);
}

TEST(Stationarity, ExactlyRepresentableGradient) {
  Matrix a(2, 3);
  a << 1.0, 0.0, 1.0, 0.0, 1.0, 1.0;
  const Vector lambda = (Vector(3) << 0.5, 0.0, 2.0).finished();
  const auto report = stationarity_error(a * lambda, Vector::Zero(3), a);
  EXPECT_LE(report.residual, 1e-10);
  EXPECT_GE(report.multipliers.minCoeff(), 0.0);
}

TEST(Stationarity, MatchesGridBruteForce) {
  oracle::Uniform u(31);
  for (int trial = 0; trial < 40; ++trial) {
    Matrix a(3, 3);
    Vector g(3);
    for (int i = 0; i < 3; ++i) {
      g(i) = u(-2.0, 2.0);
      for (int j = 0; j < 3; ++j) a(i, j) = u(-1.0, 1.0);
    }
    const double got = stationarity_error(g, Vector::Zero(3), a).residual;
    const double grid = oracle::nnls_grid3(g, a, 12.0, 0.01);
    // the grid can only overestimate
    EXPECT_LE(got, grid + 1e-9) << trial;
    EXPECT_NEAR(got, grid, 2e-3 * (1.0 + 10.0 * a.norm())) << trial;
  }
}

TEST(Stationarity, ScalesWithGradient) {
  oracle::Uniform u(5);
  Matrix a(3, 3);
  Vector g(3);
  for (int i = 0; i < 3; ++i) {
    g(i) = u(-2.0, 2.0);
    for (int j = 0; j < 3; ++j) a(i, j) = u(-1.0, 1.0);
  }
  const double base = stationarity_error(g, Vector::Zero(3), a).residual;
  for (double t : {0.1, 3.0, 50.0}) EXPECT_NEAR(stationarity_error(t * g, Vector::Zero(3), a).residual, t * base, 1e-9 * t);
}

TEST(Stationarity, KktPointOfBoxProblem) {
  // minimize |x - (3, 0.5)|^2 / 2 over [0, 1]^2 at x = (1, 0.5).
  const auto set = BoxPolyhedron::box(Vector::Zero(2), Vector::Ones(2));
  const Vector x = (Vector(2) << 1.0, 0.5).finished();
  const Vector g = (Vector(2) << -2.0, 0.0).finished();
  const ConstraintValue c = set_constraints(set, x);
  const auto report = stationarity_error(g, c.value, c.jacobian);
  EXPECT_LE(report.residual, 1e-8);
  EXPECT_NEAR(report.multipliers(2), 2.0, 1e-8);
  // moving off the bound loses stationarity
  const Vector y = (Vector(2) << 0.9, 0.5).finished();
  const ConstraintValue cy = set_constraints(set, y);
  EXPECT_DOUBLE_EQ(stationarity_error(g, cy.value, cy.jacobian).residual, 2.0);
}

TEST(Stationarity, ConstraintLayout) {
  BoxPolyhedron set = BoxPolyhedron::box(Vector::Zero(2), Vector::Ones(2));
  set.ineq_matrix = (Matrix(1, 2) << 1.0, 1.0).finished();
  set.ineq_rhs = Vector::Constant(1, 1.5);
  const Vector x = (Vector(2) << 0.25, 0.5).finished();
  const ConstraintValue c = set_constraints(set, x);
  EXPECT_EQ(c.value.size(), 5);
  EXPECT_DOUBLE_EQ(c.value(0), 0.25);
  EXPECT_DOUBLE_EQ(c.value(3), 0.5);
  EXPECT_DOUBLE_EQ(c.value(4), 0.75);
  EXPECT_DOUBLE_EQ(c.jacobian(1, 3), -1.0);
  EXPECT_DOUBLE_EQ(c.jacobian(0, 4), -1.0);
}

TEST(Epochs, Index) {
  EXPECT_EQ(epoch_index(1, 500), 0);
  EXPECT_EQ(epoch_index(500, 500), 0);
  EXPECT_EQ(epoch_index(501, 500), 1);
  EXPECT_EQ(epoch_index(50000, 500), 99);
  EXPECT_THROW(epoch_index(1, 0), std::invalid_argument);
}

namespace {

IterationTrace synthetic_trace(int iterations, int batch, long long budget) {
  IterationTrace trace;
  trace.dimension = 2;
  trace.budget = budget;
  trace.stop = StopReason::Budget;
  for (int k = 0; k < iterations; ++k) {
    IterationRecord rec;
    rec.k = k;
    rec.x = Vector::Constant(2, k);
    rec.sample_size = batch;
    rec.oracle_calls = static_cast<long long>(k + 1) * batch;
    rec.stationarity = 1.0 / (k + 1);
    trace.records.push_back(rec);
  }
  trace.oracle_calls = trace.records.empty() ? 0 : trace.records.back().oracle_calls;
  trace.final_x = Vector::Zero(2);
  return trace;
}

}  // namespace

TEST(Epochs, ExportCarriesLatestRecordPerEpoch) {
  const auto table = export_trace(synthetic_trace(200, 3, 600), 3);
  ASSERT_EQ(table.iterations.size(), 200u);
  ASSERT_EQ(table.epochs.size(), 200u);
  for (int e = 0; e < 200; ++e) {
    EXPECT_EQ(table.epochs[e].epoch, e);
    EXPECT_EQ(table.epochs[e].k, e);
  }
  // batches of 7 against epochs of 10
  const auto coarse = export_trace(synthetic_trace(10, 7, 75), 10);
  ASSERT_EQ(coarse.epochs.size(), 8u);
  const int expected_k[] = {0, 1, 3, 4, 6, 7, 9, 9};
  for (int e = 0; e < 8; ++e) {
    EXPECT_EQ(coarse.epochs[e].k, expected_k[e]) << e;
    EXPECT_LE(coarse.epochs[e].oracle_calls, (e + 1) * 10 + (e == 0 ? 7 : 0));
  }
}

TEST(Epochs, EmptyTraceWritesHeaderOnly) {
  const auto table = export_trace(synthetic_trace(0, 3, 30), 10);
  EXPECT_TRUE(table.epochs.empty());
  std::ostringstream out;
  write_trace_rows(out, table.iterations, 2);
  EXPECT_EQ(out.str(), trace_header(2) + "\n");
}

TEST(Epochs, HeaderAndFiles) {
  EXPECT_EQ(trace_header(2),
            "k,epoch,oracle_calls,step_norm,pred_decrease,zeta,beta,alpha,theta,N,stationarity,merit,"
            "objective_estimate,x0,x1");
  const auto dir = std::filesystem::temp_directory_path() / "stosqp_diag_test";
  std::filesystem::remove_all(dir);
  const auto files = write_trace_files(synthetic_trace(5, 4, 20), 8, dir.string(), "demo");
  ASSERT_EQ(files.size(), 2u);
  std::ifstream epochs(files[1]);
  std::string line;
  int lines = 0;
  while (std::getline(epochs, line)) ++lines;
  EXPECT_EQ(lines, 1 + 3);
  std::filesystem::remove_all(dir);
}
