#pragma once

#include <string_view>

#include "stosqp/types.hpp"

namespace stosqp {

/// Dense linear program
///
///   minimize    cost' x
///   subject to  ineq_matrix * x <= ineq_rhs
///               lower <= x <= upper
///
/// Lower bounds must be finite; upper bounds may be +infinity.
struct LpProblem {
  Vector cost;
  Matrix ineq_matrix;  // s x q
  Vector ineq_rhs;
  Vector lower;
  Vector upper;

  Index num_variables() const { return cost.size(); }
  Index num_rows() const { return ineq_rhs.size(); }
  void validate() const;
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

std::string_view to_string(LpStatus status);

/// Solution with multipliers for the Lagrangian
///
///   L(x, mu) = cost' x + mu' (ineq_matrix x - ineq_rhs)
///
/// so `duals` (mu) are nonnegative. `bound_duals` are the reduced costs
/// cost + ineq_matrix' mu: positive on variables resting at their lower
/// bound, negative on variables at a finite upper bound.
struct LpSolution {
  Vector primal;
  Vector duals;
  Vector bound_duals;
  double objective = 0.0;
  LpStatus status = LpStatus::Infeasible;
  int iterations = 0;
};

struct LpOptions {
  double pivot_tol = 1e-10;
  double feasibility_tol = 1e-9;
  double optimality_tol = 1e-9;
  // Bland's rule is engaged after bland_factor * (q + s) pivots.
  int bland_factor = 10;
};

LpSolution solve_lp(const LpProblem& problem, const LpOptions& options = {});

struct LpResiduals {
  double primal_res = 0.0;
  double dual_res = 0.0;
  double gap = 0.0;
};

/// Primal infeasibility, dual infeasibility, and |primal - dual objective|.
LpResiduals verify_lp(const LpProblem& problem, const LpSolution& solution);

}  // namespace stosqp
