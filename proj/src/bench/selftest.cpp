#include "stosqp/bench/selftest.hpp"

#include <cmath>
#include <functional>
#include <ostream>
#include <string>

#include "stosqp/bench/pps.hpp"
#include "stosqp/bench/synthetic.hpp"
#include "stosqp/bench/truncated_normal.hpp"
#include "stosqp/diagnostics.hpp"
#include "stosqp/lp.hpp"
#include "stosqp/qp.hpp"
#include "stosqp/sampling.hpp"

namespace stosqp::bench {

namespace {

struct Check {
  std::string name;
  std::function<std::string()> body;  // empty string on success
};

std::string qp_hand_example() {
  QpProblem qp;
  qp.gradient = Vector::Zero(2);
  qp.gradient(0) = 1.0;
  qp.curvature = 1.0;
  qp.eq_jacobian = Matrix::Ones(2, 1);
  qp.eq_residual = Vector::Zero(1);
  qp.set = BoxPolyhedron::box(Vector::Constant(2, -10.0), Vector::Constant(2, 10.0));
  const QpSolution sol = solve_qp(qp);
  if (sol.status != QpStatus::Optimal) return "status " + std::string(to_string(sol.status));
  if (std::abs(sol.step(0) + 0.5) > 1e-10 || std::abs(sol.step(1) - 0.5) > 1e-10) return "wrong step";
  if (std::abs(sol.eq_multipliers(0) + 0.5) > 1e-10) return "wrong multiplier";
  return {};
}

std::string lp_beale_cycling() {
  LpProblem lp;
  lp.cost.resize(4);
  lp.cost << -0.75, 150.0, -0.02, 6.0;
  lp.ineq_matrix.resize(3, 4);
  lp.ineq_matrix << 0.25, -60.0, -0.04, 9.0, 0.5, -90.0, -0.02, 3.0, 0.0, 0.0, 1.0, 0.0;
  lp.ineq_rhs = Vector::Zero(3);
  lp.ineq_rhs(2) = 1.0;
  lp.lower = Vector::Zero(4);
  lp.upper = Vector::Constant(4, INFINITY);
  const LpSolution sol = solve_lp(lp);
  if (sol.status != LpStatus::Optimal) return "status " + std::string(to_string(sol.status));
  if (std::abs(sol.objective + 0.05) > 1e-9) return "objective " + std::to_string(sol.objective);
  if (verify_lp(lp, sol).gap > 1e-8) return "duality gap";
  return {};
}

std::string step_contraction() {
  CounterRng rng(derive_stream_key(7, 0));
  const auto u = [&](double lo, double hi) { return lo + (hi - lo) * rng.uniform(); };
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + trial % 5;
    QpProblem qp;
    qp.curvature = u(0.5, 5.0);
    qp.set = BoxPolyhedron::box(Vector::Constant(n, -u(0.1, 1.0)), Vector::Constant(n, u(0.1, 1.0)));
    const int m = trial % 2;
    qp.eq_jacobian = Matrix::Zero(n, m);
    for (int i = 0; i < n && m > 0; ++i) qp.eq_jacobian(i, 0) = u(-1.0, 1.0);
    qp.eq_residual = Vector::Zero(m);
    Vector g(n), gbar(n);
    for (int i = 0; i < n; ++i) {
      g(i) = u(-3.0, 3.0);
      gbar(i) = u(-3.0, 3.0);
    }
    qp.gradient = g;
    const QpSolution a = solve_qp(qp);
    qp.gradient = gbar;
    const QpSolution b = solve_qp(qp);
    if (a.status != QpStatus::Optimal || b.status != QpStatus::Optimal) return "subproblem not solved";
    if ((a.step - b.step).norm() > (g - gbar).norm() / qp.curvature + 1e-8) {
      return "violated on trial " + std::to_string(trial);
    }
  }
  return {};
}

std::string upper_c2_gap_bound() {
  const SyntheticUc2Spec spec = crossing_pieces_spec((Vector(2) << 2.0, 0.5).finished());
  const BoxPolyhedron box = BoxPolyhedron::box(Vector::Constant(2, -2.0), Vector::Constant(2, 2.0));
  const double rho = suggest_rho([&](const Vector& x) { return spec.value(x); },
                                 [&](const Vector& x) { return spec.subgradient(x); }, box, 10000, 11);
  if (rho > spec.rho * (1.0 + 1e-12)) return "sampled curvature " + std::to_string(rho) + " exceeds rho";
  return {};
}

std::string scenario_determinism() {
  const ConstrainedStochasticProblem problem = make_pps_problem(build_pps_instance());
  const auto a = draw_scenarios(problem.sampler, 3, 17, 20);
  const auto b = draw_scenarios(problem.sampler, 3, 17, 20);
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] != b[i]) return "batches differ";
  }
  const auto c = draw_scenarios(problem.sampler, 3, 18, 20);
  if (a[0] == c[0]) return "iterations share a stream";
  return {};
}

std::string kkt_point_stationarity() {
  Matrix jac(3, 4);
  jac << 1, 0, 2, -1, 0, 1, 1, 0, 1, 1, 0, 3;
  Vector c(4);
  c << 0.0, 0.0, 0.5, 0.0;
  Vector lambda(4);
  lambda << 0.7, 1.3, 0.0, 0.2;
  const StationarityReport report = stationarity_error(jac * lambda, c, jac, 1e-8);
  if (report.residual > 1e-8) return "residual " + std::to_string(report.residual);
  return {};
}

std::string truncated_normal_support() {
  CounterRng rng(derive_stream_key(5, 0));
  for (int i = 0; i < 100000; ++i) {
    const double t = sample_truncated_normal(16.0, 17.0, rng);
    if (t < 16.0 || t > 17.0) return "draw outside interval";
  }
  return {};
}

}  // namespace

int run_selftest(std::ostream& out) {
  const std::vector<Check> checks{
      {"qp_hand_example", qp_hand_example},
      {"lp_beale_cycling", lp_beale_cycling},
      {"step_contraction", step_contraction},
      {"upper_c2_gap_bound", upper_c2_gap_bound},
      {"scenario_determinism", scenario_determinism},
      {"kkt_point_stationarity", kkt_point_stationarity},
      {"truncated_normal_support", truncated_normal_support},
  };
  int failures = 0;
  for (const auto& check : checks) {
    std::string detail;
    try {
      detail = check.body();
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    if (detail.empty()) {
      out << "PASS " << check.name << '\n';
    } else {
      out << "FAIL " << check.name << ": " << detail << '\n';
      ++failures;
    }
  }
  return failures;
}

}  // namespace stosqp::bench
