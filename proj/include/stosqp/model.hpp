#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "stosqp/qp.hpp"
#include "stosqp/rng.hpp"
#include "stosqp/types.hpp"

namespace stosqp {

/// Opaque scenario payload. The library never looks inside; only the
/// problem's sampler and oracle interpret it.
using Scenario = Vector;

struct OracleValue {
  double value = 0.0;
  Vector subgradient;
};

struct ConstraintValue {
  Vector value;     // c(x), length m
  Matrix jacobian;  // n x m, column j is the gradient of c_j
};

using ScenarioSampler = std::function<std::vector<Scenario>(CounterRng& stream, int count)>;
using ScenarioOracle = std::function<OracleValue(const Vector& x, const Scenario& scenario)>;
using ConstraintOracle = std::function<ConstraintValue(const Vector& x)>;
using ExpectedOracle = std::function<OracleValue(const Vector& x)>;

/// minimize E[R(x, xi)] subject to c(x) = 0, x in C.
///
/// The oracle must be a pure function of (x, scenario): the sampling layer
/// may call it from several threads at once. `rho_estimate` bounds the
/// upper-C2 curvature of the objective and `lipschitz_h` the curvature of
/// each constraint component. `expected` is an optional exact (or
/// high-accuracy) expectation oracle used only for diagnostics.
struct ConstrainedStochasticProblem {
  int dimension = 0;
  ScenarioSampler sampler;
  ScenarioOracle oracle;
  std::optional<ConstraintOracle> eq_constraints;
  BoxPolyhedron set;
  double rho_estimate = 1.0;
  double lipschitz_h = 0.0;
  std::optional<ExpectedOracle> expected;

  bool has_equalities() const { return eq_constraints.has_value(); }
  int num_equalities(const Vector& x) const;

  /// Throws std::invalid_argument when a required piece is missing or
  /// inconsistent.
  void validate() const;
};

/// Quadratic model Phi(d) = value_at_center + gradient' d + (curvature/2) |d|^2.
struct LocalModel {
  double value_at_center = 0.0;
  Vector gradient;
  double curvature = 1.0;
};

double model_value(const LocalModel& model, const Vector& d);

/// Phi(0) - Phi(d).
double predicted_decrease(const LocalModel& model, const Vector& d);

/// Phi(0) - Phi(beta d), 0 < beta <= 1.
double predicted_decrease_with_step(const LocalModel& model, const Vector& d, double beta);

/// objective_value + theta |c_value|_1.
double merit_value(double objective_value, const Vector& c_value, double theta);

/// r(x + d) - r(x) - g' d. The upper-C2 inequality bounds this by
/// (rho/2) |d|^2.
double upper_c2_gap(double r_at_x, double r_at_xd, const Vector& g, const Vector& d);

}  // namespace stosqp
