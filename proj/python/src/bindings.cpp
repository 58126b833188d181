#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "stosqp/bench/cli.hpp"
#include "stosqp/bench/config.hpp"
#include "stosqp/bench/experiment.hpp"
#include "stosqp/bench/pps.hpp"
#include "stosqp/bench/selftest.hpp"
#include "stosqp/diagnostics.hpp"
#include "stosqp/lp.hpp"
#include "stosqp/qp.hpp"

namespace py = pybind11;
using namespace py::literals;
using namespace stosqp;

namespace {

std::string str(std::string_view s) { return std::string(s); }

py::dict qp_solve(const Vector& gradient, double curvature, std::optional<Matrix> eq_jacobian,
                  std::optional<Vector> eq_residual, const Vector& lower, const Vector& upper,
                  std::optional<Matrix> ineq_matrix, std::optional<Vector> ineq_rhs, double tol) {
  const Index n = gradient.size();
  QpProblem qp;
  qp.gradient = gradient;
  qp.curvature = curvature;
  qp.eq_jacobian = eq_jacobian.value_or(Matrix(n, 0));
  qp.eq_residual = eq_residual.value_or(Vector(0));
  qp.set = BoxPolyhedron::box(lower, upper);
  if (ineq_matrix) {
    qp.set.ineq_matrix = *ineq_matrix;
    qp.set.ineq_rhs = ineq_rhs.value_or(Vector::Zero(ineq_matrix->rows()));
  }
  QpOptions options;
  options.tol = tol;
  const QpSolution sol = solve_qp(qp, options);
  return py::dict("status"_a = str(to_string(sol.status)), "step"_a = sol.step, "eq_multipliers"_a = sol.eq_multipliers,
                  "set_multiplier"_a = sol.set_multiplier, "objective"_a = sol.objective,
                  "iterations"_a = sol.iterations, "dropped_dependent_row"_a = sol.dropped_dependent_row);
}

py::dict lp_solve(const Vector& cost, std::optional<Matrix> a, std::optional<Vector> b, const Vector& lower,
                  const Vector& upper) {
  LpProblem lp;
  lp.cost = cost;
  lp.ineq_matrix = a.value_or(Matrix(0, cost.size()));
  lp.ineq_rhs = b.value_or(Vector(0));
  lp.lower = lower;
  lp.upper = upper;
  const LpSolution sol = solve_lp(lp);
  return py::dict("status"_a = str(to_string(sol.status)), "x"_a = sol.primal, "duals"_a = sol.duals,
                  "reduced_costs"_a = sol.bound_duals, "objective"_a = sol.objective, "iterations"_a = sol.iterations);
}

py::list records_to_list(const IterationTrace& trace) {
  py::list out;
  for (const auto& r : trace.records) {
    out.append(py::dict("k"_a = r.k, "x"_a = r.x, "step_norm"_a = r.step_norm, "pred_decrease"_a = r.pred_decrease,
                        "zeta"_a = r.zeta, "beta"_a = r.beta, "alpha"_a = r.alpha, "theta"_a = r.theta,
                        "N"_a = r.sample_size, "oracle_calls"_a = r.oracle_calls, "stationarity"_a = r.stationarity,
                        "merit"_a = r.merit, "objective_estimate"_a = r.objective_estimate));
  }
  return out;
}

py::dict trace_to_dict(const IterationTrace& trace) {
  return py::dict("stop"_a = str(to_string(trace.stop)), "final_x"_a = trace.final_x,
                  "final_stationarity"_a = trace.final_stationarity, "oracle_calls"_a = trace.oracle_calls,
                  "records"_a = records_to_list(trace));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Stochastic SQP core";

  m.def("solve_qp", &qp_solve, "gradient"_a, "curvature"_a, "eq_jacobian"_a = py::none(), "eq_residual"_a = py::none(),
        "lower"_a, "upper"_a, "ineq_matrix"_a = py::none(), "ineq_rhs"_a = py::none(), "tol"_a = 1e-8,
        "Solve min g'd + (curvature/2)|d|^2 s.t. J'd + c = 0, lower <= d <= upper, A d <= b.");

  m.def("solve_lp", &lp_solve, "cost"_a, "A"_a = py::none(), "b"_a = py::none(), "lower"_a, "upper"_a,
        "Solve min cost'x s.t. A x <= b, lower <= x <= upper.");

  m.def(
      "stationarity_error",
      [](const Vector& g, const Vector& c, const Matrix& jacobian, double activity_tol) {
        const auto report = stationarity_error(g, c, jacobian, activity_tol);
        return py::make_tuple(report.residual, report.multipliers);
      },
      "g"_a, "c"_a, "jacobian"_a, "activity_tol"_a = 1e-6,
      "min over lambda >= 0 of |g - J lambda| on the active rows of c >= 0. Returns (residual, lambda).");

  m.def(
      "pps_instance",
      [] {
        const auto inst = bench::build_pps_instance();
        return py::dict("factories"_a = inst.factories, "stores"_a = inst.stores,
                        "first_stage_cost"_a = inst.first_stage_cost, "production_costs"_a = inst.production_costs,
                        "shipment_costs"_a = inst.shipment_costs);
      },
      "Default production/pricing/shipment instance.");

  m.def(
      "second_stage",
      [](double price, const Vector& slopes, const Vector& intercepts) {
        const auto inst = bench::build_pps_instance();
        const auto s = bench::solve_second_stage(inst, price, bench::PpsScenario{slopes, intercepts});
        return py::dict("value"_a = s.value, "dvalue_dp"_a = s.dvalue_dp, "production"_a = s.production,
                        "shipments"_a = s.shipments, "demand_duals"_a = s.demand_duals,
                        "capacity_duals"_a = s.capacity_duals);
      },
      "price"_a, "slopes"_a, "intercepts"_a, "Second-stage LP of the default instance for one scenario.");

  m.def(
      "pps_oracle",
      [](const Vector& first_stage, const Vector& slopes, const Vector& intercepts) {
        const auto inst = bench::build_pps_instance();
        const auto o = bench::pps_oracle(inst, first_stage, bench::encode(bench::PpsScenario{slopes, intercepts}));
        return py::make_tuple(o.value, o.subgradient);
      },
      "first_stage"_a, "slopes"_a, "intercepts"_a, "(value, subgradient) at (x, p) for one scenario.");

  m.def(
      "pps_expected",
      [](const Vector& first_stage) {
        const auto o = bench::pps_expected_oracle(bench::build_pps_instance(), first_stage);
        return py::make_tuple(o.value, o.subgradient);
      },
      "first_stage"_a, "Exact expected (value, gradient) at (x, p).");

  m.def(
      "run_config",
      [](const std::string& json_text, const std::string& out_dir) {
        const auto cfg = bench::parse_run_config(json_text);
        bench::RunOutcome outcome;
        {
          py::gil_scoped_release release;
          outcome = bench::execute_run(cfg, out_dir);
        }
        py::dict d = trace_to_dict(outcome.trace);
        d["files"] = outcome.files;
        return d;
      },
      "config_json"_a, "out_dir"_a, "Run one solve described by a JSON config and write its trace files.");

  m.def(
      "run_pps_experiment",
      [](std::vector<std::string> strategies, int seeds, long long budget, long long epoch, std::uint64_t seed_base,
         int jobs, const std::string& out_dir) {
        bench::PpsExperiment e;
        e.strategies = std::move(strategies);
        e.seeds = seeds;
        e.budget = budget;
        e.epoch = epoch;
        e.seed_base = seed_base;
        e.jobs = jobs;
        e.out_dir = out_dir;
        std::vector<bench::PpsRun> runs;
        {
          py::gil_scoped_release release;
          runs = bench::run_pps_experiment(e, bench::build_pps_instance());
        }
        py::list out;
        for (const auto& r : runs) {
          py::dict d = trace_to_dict(r.trace);
          d["strategy"] = r.strategy;
          d["seed"] = r.seed;
          d["final_objective"] = r.final_objective;
          out.append(d);
        }
        return out;
      },
      "strategies"_a = std::vector<std::string>{"fixed:10", "fixed:100", "fixed:1000", "poly:1.25:1000", "adaptive"},
      "seeds"_a = 5, "budget"_a = 50000, "epoch"_a = 500, "seed_base"_a = 1, "jobs"_a = 1, "out_dir"_a = "",
      "Run the production/pricing/shipment benchmark.");

  m.def(
      "cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        int code = 0;
        {
          py::gil_scoped_release release;
          code = bench::cli_main(args, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      "args"_a, "Run the command line tool in-process. Returns (exit_code, stdout, stderr).");

  m.def(
      "selftest",
      [] {
        std::ostringstream out;
        const int failures = bench::run_selftest(out);
        return py::make_tuple(failures, out.str());
      },
      "Run the built-in invariant checks. Returns (failures, report).");

  py::register_exception<bench::ConfigError>(m, "ConfigError", PyExc_ValueError);
}
