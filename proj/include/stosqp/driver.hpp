#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "stosqp/model.hpp"
#include "stosqp/sampling.hpp"
#include "stosqp/types.hpp"

namespace stosqp {

enum class AlphaRule { Constant, Geometric };

/// Stationarity measure evaluated at an iterate; supplied by the caller
/// (see diagnostics.hpp) because it needs a reference subgradient.
using StationarityProbe = std::function<double(const Vector& x)>;

enum class MeasureMode { Never, EveryIteration, EpochEnds };

struct SolverConfig {
  double alpha0 = 1.0;
  double eta_alpha = 1.5;
  double eta_beta = 0.5;
  double gamma = 1.0;
  double theta0 = 1.0;
  std::function<double(int)> nu = [](int) { return 1.0; };
  std::function<double(int)> mu = [](int) { return 0.0; };
  SamplingStrategy strategy = SamplingStrategy::fixed(10);
  long long budget = 50000;  // an iteration whose batch would exceed it is not started
  int max_iterations = 100000;
  std::uint64_t master_seed = 0;
  double qp_tol = 1e-8;
  Vector x0;

  AlphaRule alpha_rule = AlphaRule::Constant;
  double alpha_growth = 1.1;

  int workers = 1;
  int stall_window = 10;
  double stall_tol = 1e-8;

  StationarityProbe probe;
  MeasureMode measure = MeasureMode::Never;
  long long epoch_size = 500;

  /// Throws std::invalid_argument if a field is out of range for `problem`,
  /// including alpha0 outside [rho, eta_alpha * rho] and x0 outside C.
  void validate(const ConstrainedStochasticProblem& problem) const;
};

struct IterationRecord {
  int k = 0;
  Vector x;     // iterate x_k at which the model was built
  Vector step;  // subproblem solution d_k
  double step_norm = 0.0;
  double pred_decrease = 0.0;
  double zeta = 1.0;
  double pi = 1.0;
  double beta = 1.0;
  int backtracks = 0;
  double alpha = 0.0;
  double theta = 0.0;
  double lambda_inf = 0.0;
  int sample_size = 0;
  long long oracle_calls = 0;  // cumulative, including this iteration
  double stationarity = std::numeric_limits<double>::quiet_NaN();
  double merit = 0.0;
  double objective_estimate = 0.0;
  double constraint_l1 = 0.0;
  SampleSizeEvent sample_event = SampleSizeEvent::Unchanged;
};

enum class StopReason { Budget, MaxIterations, Stall, QpInfeasible, QpFailure };

std::string_view to_string(StopReason reason);

struct IterationTrace {
  int dimension = 0;
  std::vector<IterationRecord> records;
  Vector final_x;
  double final_stationarity = std::numeric_limits<double>::quiet_NaN();
  StopReason stop = StopReason::MaxIterations;
  long long oracle_calls = 0;
  long long budget = 0;
};

/// Algorithm without equality constraints: full steps x <- x + d.
IterationTrace run_full_step(const ConstrainedStochasticProblem& problem, const SolverConfig& config);

/// Equality-constrained algorithm with l1-merit backtracking.
IterationTrace run_merit_line_search(const ConstrainedStochasticProblem& problem, const SolverConfig& config);

/// Dispatches on problem.has_equalities().
IterationTrace run_solver(const ConstrainedStochasticProblem& problem, const SolverConfig& config);

/// max(theta_prev, |lambda|_inf + gamma)
double update_theta(double theta_prev, const Vector& lambda, double gamma);

/// min{1, (1/2)^ceil(log_{1/2}(eta_beta alpha / (h theta m)))}; 1 when h = 0.
double compute_pi(double eta_beta, double alpha, double h, double theta, int m);

/// The sufficient-decrease test
///   theta |c(x)|_1 - zeta |lambda' c(x)| >= theta |c(x + zeta d)|_1 - eta_beta alpha zeta |d|^2 / 2.
bool line_search_accepts(const Vector& c_at_x, const Vector& c_at_trial, const Vector& lambda, double theta,
                         double alpha, double eta_beta, double zeta, double step_norm_sq);

struct LineSearchResult {
  double zeta = 1.0;
  int backtracks = 0;
};

class LineSearchFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Largest zeta in {1, 1/2, 1/4, ...} passing line_search_accepts. Throws
/// LineSearchFailure after 64 halvings.
LineSearchResult line_search(const ConstrainedStochasticProblem& problem, const Vector& x, const Vector& d,
                             const Vector& lambda, double theta, double alpha, double eta_beta);

/// Next curvature in [alpha, eta_alpha * rho].
double update_alpha(double alpha, const SolverConfig& config, double rho);

}  // namespace stosqp
