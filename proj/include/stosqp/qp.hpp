#pragma once

#include <string_view>

#include "stosqp/types.hpp"

namespace stosqp {

/// Compact convex set {x : lower <= x <= upper, ineq_matrix * x <= ineq_rhs}.
///
/// All bounds must be finite. The general inequality block may be empty
/// (zero rows).
struct BoxPolyhedron {
  Vector lower;
  Vector upper;
  Matrix ineq_matrix;  // p x n
  Vector ineq_rhs;     // p

  static BoxPolyhedron box(Vector lower, Vector upper);

  Index dimension() const { return lower.size(); }
  Index num_inequalities() const { return ineq_rhs.size(); }

  /// Throws std::invalid_argument when dimensions disagree, a bound is not
  /// finite, or lower > upper somewhere.
  void validate() const;

  bool contains(const Vector& x, double tol = 1e-9) const;

  /// Largest violation of any bound or inequality row at x (0 inside).
  double violation(const Vector& x) const;

  /// The set of steps d with center + d inside this set.
  BoxPolyhedron translated(const Vector& center) const;

  /// Componentwise clamp onto the bound box (inequality rows ignored).
  Vector clamp(const Vector& x) const;
};

/// Strictly convex subproblem
///
///   minimize    gradient' d + (curvature / 2) |d|^2
///   subject to  eq_jacobian' d + eq_residual = 0
///               d in set
///
/// `set` is expressed in step coordinates; use BoxPolyhedron::translated to
/// move a set on x into step coordinates around the current iterate.
/// eq_jacobian is n x m; m = 0 means no equality rows.
struct QpProblem {
  Vector gradient;
  double curvature = 1.0;
  Matrix eq_jacobian;
  Vector eq_residual;
  BoxPolyhedron set;

  Index dimension() const { return gradient.size(); }
  Index num_equalities() const { return eq_residual.size(); }
  void validate() const;
};

enum class QpStatus { Optimal, Infeasible, NumericalFailure };

std::string_view to_string(QpStatus status);

/// Step and multipliers of a QpProblem.
///
/// Stationarity reads
///   gradient + curvature * step + eq_jacobian * eq_multipliers + normal() = 0.
/// set_multiplier has n + p entries. The first n are signed bound
/// multipliers: a negative entry is the (magnitude of the) multiplier of an
/// active lower bound, a positive entry that of an active upper bound. The
/// remaining p entries are the nonnegative multipliers of the inequality
/// rows.
struct QpSolution {
  Vector step;
  Vector eq_multipliers;
  Vector set_multiplier;
  double kkt_residual = 0.0;
  double objective = 0.0;
  QpStatus status = QpStatus::NumericalFailure;
  int iterations = 0;
  // Set when a linearly dependent working-set row had to be dropped.
  bool dropped_dependent_row = false;

  double lower_bound_multiplier(Index i) const;
  double upper_bound_multiplier(Index i) const;
  Vector inequality_multipliers() const;

  /// Aggregate normal-cone element v = bound part + ineq_matrix' * mu.
  Vector normal(const BoxPolyhedron& set) const;
};

struct QpOptions {
  double tol = 1e-8;
  int max_iter = 0;  // 0 selects 50 * (n + m + p)
  double phase1_tol = 1e-6;
  double rank_tol = 1e-12;
};

QpSolution solve_qp(const QpProblem& problem, const QpOptions& options = {});
QpSolution solve_qp(const QpProblem& problem, double tol, int max_iter);

/// Max of the stationarity, primal feasibility, dual feasibility and
/// complementarity residuals (infinity norms). Throws std::invalid_argument
/// on dimension mismatch.
double kkt_residual(const QpProblem& problem, const QpSolution& candidate);

/// Value of gradient' d + (curvature / 2) |d|^2.
double qp_objective(const QpProblem& problem, const Vector& step);

}  // namespace stosqp
