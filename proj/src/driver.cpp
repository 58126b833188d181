#include "stosqp/driver.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "stosqp/qp.hpp"

namespace stosqp {

std::string_view to_string(StopReason reason) {
  switch (reason) {
    case StopReason::Budget:
      return "budget";
    case StopReason::MaxIterations:
      return "max_iterations";
    case StopReason::Stall:
      return "stall";
    case StopReason::QpInfeasible:
      return "qp_infeasible";
    case StopReason::QpFailure:
      return "qp_failure";
  }
  return "unknown";
}

void SolverConfig::validate(const ConstrainedStochasticProblem& problem) const {
  problem.validate();
  const double rho = problem.rho_estimate;
  if (!(eta_alpha > 1.0)) throw std::invalid_argument("config: eta_alpha must exceed 1");
  const double slack = 1e-12 * rho;
  if (!(alpha0 >= rho - slack && alpha0 <= eta_alpha * rho + slack)) {
    throw std::invalid_argument("config: alpha0 must lie in [rho, eta_alpha * rho]");
  }
  if (!(eta_beta > 0.0 && eta_beta < 1.0)) throw std::invalid_argument("config: eta_beta must lie in (0, 1)");
  if (!(gamma > 0.0)) throw std::invalid_argument("config: gamma must be positive");
  if (!(theta0 > 0.0)) throw std::invalid_argument("config: theta0 must be positive");
  if (!nu || !mu) throw std::invalid_argument("config: nu and mu schedules are required");
  strategy.validate();
  if (budget < 2) throw std::invalid_argument("config: budget must be at least 2");
  if (max_iterations < 1) throw std::invalid_argument("config: max_iterations must be positive");
  if (!(qp_tol > 0.0)) throw std::invalid_argument("config: qp_tol must be positive");
  if (x0.size() != problem.dimension) throw std::invalid_argument("config: x0 has the wrong dimension");
  if (!problem.set.contains(x0)) throw std::invalid_argument("config: x0 must lie in C");
  if (alpha_rule == AlphaRule::Geometric && !(alpha_growth >= 1.0)) {
    throw std::invalid_argument("config: alpha_growth must be at least 1");
  }
  if (workers < 1) throw std::invalid_argument("config: workers must be positive");
  if (epoch_size < 1) throw std::invalid_argument("config: epoch_size must be positive");
  if (measure != MeasureMode::Never && !probe) {
    throw std::invalid_argument("config: a stationarity probe is required to measure");
  }
}

double update_theta(double theta_prev, const Vector& lambda, double gamma) {
  if (!(gamma > 0.0)) throw std::invalid_argument("update_theta: gamma must be positive");
  const double lambda_inf = lambda.size() > 0 ? lambda.lpNorm<Eigen::Infinity>() : 0.0;
  return std::max(theta_prev, lambda_inf + gamma);
}

double compute_pi(double eta_beta, double alpha, double h, double theta, int m) {
  if (h == 0.0) return 1.0;
  const double ratio = eta_beta * alpha / (h * theta * static_cast<double>(m));
  const double power = std::ceil(-std::log2(ratio));
  return std::min(1.0, std::pow(0.5, power));
}

bool line_search_accepts(const Vector& c_at_x, const Vector& c_at_trial, const Vector& lambda, double theta,
                         double alpha, double eta_beta, double zeta, double step_norm_sq) {
  const double lhs = theta * c_at_x.lpNorm<1>() - zeta * std::abs(lambda.dot(c_at_x));
  const double rhs = theta * c_at_trial.lpNorm<1>() - 0.5 * eta_beta * alpha * zeta * step_norm_sq;
  return lhs >= rhs;
}

LineSearchResult line_search(const ConstrainedStochasticProblem& problem, const Vector& x, const Vector& d,
                             const Vector& lambda, double theta, double alpha, double eta_beta) {
  if (!problem.eq_constraints) throw std::invalid_argument("line_search: problem has no equality constraints");
  const auto& constraints = *problem.eq_constraints;
  const Vector c_x = constraints(x).value;
  const double step_norm_sq = d.squaredNorm();
  LineSearchResult out;
  for (int halvings = 0; halvings <= 64; ++halvings) {
    const Vector c_trial = constraints(x + out.zeta * d).value;
    if (line_search_accepts(c_x, c_trial, lambda, theta, alpha, eta_beta, out.zeta, step_norm_sq)) return out;
    out.zeta *= 0.5;
    ++out.backtracks;
  }
  throw LineSearchFailure("line search exceeded 64 halvings; check the constraint curvature estimate H");
}

double update_alpha(double alpha, const SolverConfig& config, double rho) {
  switch (config.alpha_rule) {
    case AlphaRule::Constant:
      return alpha;
    case AlphaRule::Geometric:
      return std::max(alpha, std::min(config.alpha_growth * alpha, config.eta_alpha * rho));
  }
  return alpha;
}

namespace {

long long epoch_of(long long calls, long long epoch_size) {
  return calls <= 0 ? 0 : (calls - 1) / epoch_size;
}

IterationTrace run_loop(const ConstrainedStochasticProblem& problem, const SolverConfig& config, bool constrained) {
  config.validate(problem);
  IterationTrace trace;
  trace.dimension = problem.dimension;

  Vector x = config.x0;
  double alpha = config.alpha0;
  double theta = config.theta0;
  int sample_size = config.strategy.initial_size();
  long long calls = 0;
  double recent_max_step = 0.0;
  std::vector<double> recent_steps;
  bool stopped = false;

  for (int k = 0; !stopped; ++k) {
    if (k >= config.max_iterations) {
      trace.stop = StopReason::MaxIterations;
      break;
    }
    // An iteration whose batch does not fit in the remaining budget is not started.
    if (calls + sample_size > config.budget) {
      trace.stop = StopReason::Budget;
      break;
    }
    const int batch = sample_size;

    const auto scenarios = draw_scenarios(problem.sampler, config.master_seed, static_cast<std::uint64_t>(k), batch);
    const SampleStats stats = aggregate(problem, x, scenarios, config.workers);
    calls += batch;

    QpProblem qp;
    qp.gradient = stats.mean_subgradient;
    qp.curvature = alpha;
    qp.set = problem.set.translated(x);
    Vector c_x;
    if (constrained) {
      const ConstraintValue cv = (*problem.eq_constraints)(x);
      c_x = cv.value;
      qp.eq_jacobian = cv.jacobian;
      qp.eq_residual = cv.value;
    } else {
      qp.eq_jacobian.resize(problem.dimension, 0);
      qp.eq_residual.resize(0);
    }
    const QpSolution sol = solve_qp(qp, config.qp_tol, 0);
    if (sol.status == QpStatus::Infeasible) {
      trace.stop = StopReason::QpInfeasible;
      break;
    }
    if (sol.status != QpStatus::Optimal) {
      trace.stop = StopReason::QpFailure;
      break;
    }

    const Vector& d = sol.step;
    IterationRecord rec;
    rec.k = k;
    rec.x = x;
    rec.step = d;
    rec.step_norm = d.norm();
    rec.alpha = alpha;
    rec.sample_size = batch;
    rec.oracle_calls = calls;
    rec.objective_estimate = stats.mean_value;

    const LocalModel model{stats.mean_value, stats.mean_subgradient, alpha};
    rec.pred_decrease = predicted_decrease(model, d);

    if (constrained) {
      theta = update_theta(theta, sol.eq_multipliers, config.gamma);
      const LineSearchResult ls =
          line_search(problem, x, d, sol.eq_multipliers, theta, alpha, config.eta_beta);
      const int m = static_cast<int>(c_x.size());
      const double pi = compute_pi(config.eta_beta, alpha, problem.lipschitz_h, theta, m);
      const double nu = config.nu(k);
      const double mu = config.mu(k);
      if (!(nu > 0.0 && nu <= 1.0) || !(mu >= 0.0 && mu <= 1.0)) {
        throw std::invalid_argument("config: nu_k must lie in (0, 1] and mu_k in [0, 1]");
      }
      rec.zeta = ls.zeta;
      rec.backtracks = ls.backtracks;
      rec.pi = pi;
      rec.beta = std::min(nu * ls.zeta, nu * (pi + mu));
      rec.theta = theta;
      rec.lambda_inf = sol.eq_multipliers.size() > 0 ? sol.eq_multipliers.lpNorm<Eigen::Infinity>() : 0.0;
      rec.constraint_l1 = c_x.lpNorm<1>();
      rec.merit = merit_value(stats.mean_value, c_x, theta);
    } else {
      rec.merit = stats.mean_value;
    }

    x = problem.set.clamp(x + rec.beta * d);

    const SampleSizeUpdate update = next_sample_size(config.strategy, stats, alpha, d.squaredNorm(), k + 1);
    rec.sample_event = update.event;
    sample_size = update.size;
    alpha = update_alpha(alpha, config, problem.rho_estimate);

    recent_steps.push_back(rec.step_norm);
    if (static_cast<int>(recent_steps.size()) > config.stall_window) recent_steps.erase(recent_steps.begin());
    recent_max_step = *std::max_element(recent_steps.begin(), recent_steps.end());
    if (static_cast<int>(recent_steps.size()) == config.stall_window && recent_max_step <= config.stall_tol) {
      trace.stop = StopReason::Stall;
      stopped = true;
    }

    if (config.measure == MeasureMode::EveryIteration) {
      rec.stationarity = config.probe(rec.x);
    } else if (config.measure == MeasureMode::EpochEnds) {
      const long long next_calls = calls + sample_size;
      const bool last = stopped || k + 1 >= config.max_iterations || next_calls > config.budget;
      if (last || k == 0 || epoch_of(next_calls, config.epoch_size) != epoch_of(calls, config.epoch_size)) {
        rec.stationarity = config.probe(rec.x);
      }
    }
    trace.records.push_back(std::move(rec));
  }

  trace.final_x = x;
  trace.oracle_calls = calls;
  trace.budget = config.budget;
  if (config.probe) {
    trace.final_stationarity = config.probe(x);
    if (config.measure != MeasureMode::Never && !trace.records.empty() &&
        std::isnan(trace.records.back().stationarity)) {
      trace.records.back().stationarity = config.probe(trace.records.back().x);
    }
  }
  return trace;
}

}  // namespace

IterationTrace run_full_step(const ConstrainedStochasticProblem& problem, const SolverConfig& config) {
  if (problem.has_equalities()) {
    throw std::invalid_argument("run_full_step: problem has equality constraints; use run_merit_line_search");
  }
  return run_loop(problem, config, false);
}

IterationTrace run_merit_line_search(const ConstrainedStochasticProblem& problem, const SolverConfig& config) {
  if (!problem.has_equalities()) {
    throw std::invalid_argument("run_merit_line_search: problem has no equality constraints");
  }
  return run_loop(problem, config, true);
}

IterationTrace run_solver(const ConstrainedStochasticProblem& problem, const SolverConfig& config) {
  return problem.has_equalities() ? run_merit_line_search(problem, config) : run_full_step(problem, config);
}

}  // namespace stosqp
