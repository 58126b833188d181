#include "stosqp/lp.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace stosqp {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

enum class VarState { Basic, AtLower, AtUpper };

// Bounded-variable revised simplex on
//
//   A x' + s - a = b',   0 <= x' <= range,  s >= 0,  a >= 0
//
// where x' = x - lower, b' = b - A lower and the artificial columns a exist
// only for rows with b' < 0. Artificial variables are fixed to zero once
// phase one has driven them out.
class BoundedSimplex {
 public:
  BoundedSimplex(const LpProblem& lp, const LpOptions& options)
      : options_(options), rows_(lp.num_rows()), structural_(lp.num_variables()) {
    rhs_ = lp.ineq_rhs - lp.ineq_matrix * lp.lower;
    std::vector<Index> artificial_rows;
    for (Index i = 0; i < rows_; ++i) {
      if (rhs_[i] < 0.0) artificial_rows.push_back(i);
    }
    artificial_ = static_cast<Index>(artificial_rows.size());
    const Index cols = structural_ + rows_ + artificial_;
    columns_ = Matrix::Zero(rows_, cols);
    columns_.leftCols(structural_) = lp.ineq_matrix;
    columns_.block(0, structural_, rows_, rows_).setIdentity();
    range_ = Vector::Constant(cols, kInf);
    range_.head(structural_) = lp.upper - lp.lower;
    cost_ = Vector::Zero(cols);
    cost_.head(structural_) = lp.cost;

    state_.assign(cols, VarState::AtLower);
    basis_.resize(rows_);
    for (Index i = 0; i < rows_; ++i) basis_[i] = structural_ + i;
    for (Index k = 0; k < artificial_; ++k) {
      const Index row = artificial_rows[k];
      const Index col = structural_ + rows_ + k;
      columns_(row, col) = -1.0;
      basis_[row] = col;
    }
    for (Index j : basis_) state_[j] = VarState::Basic;
    bland_after_ = options.bland_factor * static_cast<int>(structural_ + rows_);
    max_pivots_ = 1000 + 200 * static_cast<int>(cols + rows_);
  }

  LpSolution solve() {
    LpSolution out;
    if (artificial_ > 0) {
      Vector phase1 = Vector::Zero(cost_.size());
      phase1.tail(artificial_).setOnes();
      const Outcome first = iterate(phase1);
      if (first == Outcome::Unbounded) {
        throw std::logic_error("solve_lp: phase one reported unbounded");
      }
      double infeasibility = 0.0;
      for (Index i = 0; i < rows_; ++i) {
        if (basis_[i] >= structural_ + rows_) infeasibility += values_[i];
      }
      if (infeasibility > options_.feasibility_tol * (1.0 + rhs_.lpNorm<Eigen::Infinity>())) {
        out.status = LpStatus::Infeasible;
        out.iterations = pivots_;
        return out;
      }
      range_.tail(artificial_).setZero();
    }
    const Outcome second = iterate(cost_);
    out.iterations = pivots_;
    if (second == Outcome::Unbounded) {
      out.status = LpStatus::Unbounded;
      return out;
    }
    out.status = LpStatus::Optimal;
    return out;
  }

  Vector structural_values() const {
    Vector x(structural_);
    for (Index j = 0; j < structural_; ++j) {
      x[j] = state_[j] == VarState::AtUpper ? range_[j] : 0.0;
    }
    for (Index i = 0; i < rows_; ++i) {
      if (basis_[i] < structural_) x[basis_[i]] = values_[i];
    }
    return x;
  }

  // Simplex multipliers y = B^{-T} c_B for the phase-two costs.
  Vector row_multipliers() {
    factorize();
    return rows_ > 0 ? simplex_multipliers(cost_) : Vector();
  }

 private:
  enum class Outcome { Optimal, Unbounded };

  void factorize() {
    if (rows_ == 0) {
      values_ = Vector();
      return;
    }
    Matrix basis(rows_, rows_);
    for (Index i = 0; i < rows_; ++i) basis.col(i) = columns_.col(basis_[i]);
    lu_.compute(basis);
    Vector b = rhs_;
    for (Index j = 0; j < columns_.cols(); ++j) {
      if (state_[j] == VarState::AtUpper) b -= columns_.col(j) * range_[j];
    }
    values_ = lu_.solve(b);
  }

  Vector simplex_multipliers(const Vector& cost) const {
    Vector cb(rows_);
    for (Index i = 0; i < rows_; ++i) cb[i] = cost[basis_[i]];
    return lu_.transpose().solve(cb);
  }

  Outcome iterate(const Vector& cost) {
    while (true) {
      if (pivots_ > max_pivots_) {
        throw std::logic_error("solve_lp: pivot limit exceeded");
      }
      factorize();
      const bool bland = pivots_ >= bland_after_;
      const Vector y = rows_ > 0 ? simplex_multipliers(cost) : Vector();

      Index entering = -1;
      double best = 0.0;
      double entering_sign = 0.0;
      for (Index j = 0; j < columns_.cols(); ++j) {
        if (state_[j] == VarState::Basic || range_[j] <= 0.0) continue;
        const double reduced = cost[j] - (rows_ > 0 ? y.dot(columns_.col(j)) : 0.0);
        double gain = 0.0;
        double sign = 0.0;
        if (state_[j] == VarState::AtLower && reduced < -options_.optimality_tol) {
          gain = -reduced;
          sign = 1.0;
        } else if (state_[j] == VarState::AtUpper && reduced > options_.optimality_tol) {
          gain = reduced;
          sign = -1.0;
        }
        if (sign == 0.0) continue;
        if (bland) {
          entering = j;
          entering_sign = sign;
          break;
        }
        if (gain > best) {
          best = gain;
          entering = j;
          entering_sign = sign;
        }
      }
      if (entering < 0) return Outcome::Optimal;

      const Vector direction =
          rows_ > 0 ? Vector(lu_.solve(Vector(columns_.col(entering)))) : Vector();
      // Basic variables move as values - step * entering_sign * direction.
      double step = range_[entering];
      Index leaving = -1;
      bool leaving_to_upper = false;
      double leaving_pivot = 0.0;
      for (Index i = 0; i < rows_; ++i) {
        const double rate = -entering_sign * direction[i];
        const Index var = basis_[i];
        double limit = kInf;
        bool to_upper = false;
        if (rate < -options_.pivot_tol) {
          limit = std::max(values_[i], 0.0) / -rate;
        } else if (rate > options_.pivot_tol && std::isfinite(range_[var])) {
          limit = std::max(range_[var] - values_[i], 0.0) / rate;
          to_upper = true;
        } else {
          continue;
        }
        bool take = false;
        if (limit < step) {
          take = true;
        } else if (limit == step && leaving >= 0) {
          // Ties: Bland picks the lowest variable index, otherwise prefer the
          // larger pivot, then the lowest index.
          const double pivot = std::abs(direction[i]);
          if (bland) {
            take = var < basis_[leaving];
          } else if (pivot > leaving_pivot) {
            take = true;
          } else if (pivot == leaving_pivot) {
            take = var < basis_[leaving];
          }
        }
        if (take) {
          step = limit;
          leaving = i;
          leaving_to_upper = to_upper;
          leaving_pivot = std::abs(direction[i]);
        }
      }
      if (!std::isfinite(step)) return Outcome::Unbounded;
      ++pivots_;
      if (leaving < 0) {
        // Bound flip of the entering variable.
        state_[entering] =
            state_[entering] == VarState::AtLower ? VarState::AtUpper : VarState::AtLower;
        continue;
      }
      const Index out = basis_[leaving];
      state_[out] = leaving_to_upper ? VarState::AtUpper : VarState::AtLower;
      basis_[leaving] = entering;
      state_[entering] = VarState::Basic;
    }
  }

  LpOptions options_;
  Index rows_;
  Index structural_;
  Index artificial_ = 0;
  Matrix columns_;
  Vector rhs_;
  Vector range_;
  Vector cost_;
  std::vector<VarState> state_;
  std::vector<Index> basis_;
  Vector values_;
  Eigen::PartialPivLU<Matrix> lu_;
  int pivots_ = 0;
  int bland_after_ = 0;
  int max_pivots_ = 0;
};

}  // namespace

void LpProblem::validate() const {
  const Index q = cost.size();
  if (lower.size() != q || upper.size() != q) {
    throw std::invalid_argument("LpProblem: bound dimensions do not match cost");
  }
  if (ineq_matrix.rows() != ineq_rhs.size() || (ineq_matrix.rows() > 0 && ineq_matrix.cols() != q)) {
    throw std::invalid_argument("LpProblem: constraint dimensions inconsistent");
  }
  for (Index j = 0; j < q; ++j) {
    if (!std::isfinite(lower[j])) throw std::invalid_argument("LpProblem: lower bounds must be finite");
    if (lower[j] > upper[j]) throw std::invalid_argument("LpProblem: lower > upper");
  }
}

std::string_view to_string(LpStatus status) {
  switch (status) {
    case LpStatus::Optimal:
      return "optimal";
    case LpStatus::Infeasible:
      return "infeasible";
    case LpStatus::Unbounded:
      return "unbounded";
  }
  return "unknown";
}

LpSolution solve_lp(const LpProblem& problem, const LpOptions& options) {
  problem.validate();
  LpProblem lp = problem;
  if (lp.ineq_matrix.rows() == 0) lp.ineq_matrix.resize(0, lp.num_variables());

  BoundedSimplex simplex(lp, options);
  LpSolution solution = simplex.solve();
  if (solution.status != LpStatus::Optimal) return solution;

  solution.primal = lp.lower + simplex.structural_values();
  const Vector y = simplex.row_multipliers();
  solution.duals = -y;
  solution.bound_duals = lp.cost + lp.ineq_matrix.transpose() * solution.duals;
  solution.objective = lp.cost.dot(solution.primal);
  return solution;
}

LpResiduals verify_lp(const LpProblem& problem, const LpSolution& solution) {
  LpResiduals res;
  const Index q = problem.num_variables();
  const Index s = problem.num_rows();
  const Vector& x = solution.primal;
  if (x.size() != q || solution.duals.size() != s || solution.bound_duals.size() != q) {
    throw std::invalid_argument("verify_lp: solution dimensions do not match problem");
  }

  for (Index i = 0; i < s; ++i) {
    res.primal_res = std::max(res.primal_res, problem.ineq_matrix.row(i).dot(x) - problem.ineq_rhs[i]);
  }
  for (Index j = 0; j < q; ++j) {
    res.primal_res = std::max(res.primal_res, problem.lower[j] - x[j]);
    res.primal_res = std::max(res.primal_res, x[j] - problem.upper[j]);
  }

  // Dual objective: min over lower <= x <= upper of L(x, mu) given bound duals.
  double dual_objective = -solution.duals.dot(problem.ineq_rhs);
  for (Index i = 0; i < s; ++i) res.dual_res = std::max(res.dual_res, -solution.duals[i]);
  const Vector reduced = problem.cost + problem.ineq_matrix.transpose() * solution.duals;
  for (Index j = 0; j < q; ++j) {
    res.dual_res = std::max(res.dual_res, std::abs(reduced[j] - solution.bound_duals[j]));
    const double r = solution.bound_duals[j];
    if (r >= 0.0) {
      dual_objective += r * problem.lower[j];
    } else if (std::isfinite(problem.upper[j])) {
      dual_objective += r * problem.upper[j];
    } else {
      res.dual_res = std::max(res.dual_res, -r);
    }
  }
  res.gap = std::abs(problem.cost.dot(x) - dual_objective);
  return res;
}

}  // namespace stosqp
