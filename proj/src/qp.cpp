#include "stosqp/qp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "stosqp/lp.hpp"

namespace stosqp {

BoxPolyhedron BoxPolyhedron::box(Vector lower, Vector upper) {
  BoxPolyhedron set;
  set.ineq_matrix.resize(0, lower.size());
  set.ineq_rhs.resize(0);
  set.lower = std::move(lower);
  set.upper = std::move(upper);
  set.validate();
  return set;
}

void BoxPolyhedron::validate() const {
  const Index n = lower.size();
  if (upper.size() != n) throw std::invalid_argument("BoxPolyhedron: bound sizes differ");
  if (ineq_matrix.rows() != ineq_rhs.size()) {
    throw std::invalid_argument("BoxPolyhedron: inequality rows and rhs differ");
  }
  if (ineq_matrix.rows() > 0 && ineq_matrix.cols() != n) {
    throw std::invalid_argument("BoxPolyhedron: inequality matrix has wrong width");
  }
  for (Index i = 0; i < n; ++i) {
    if (!std::isfinite(lower[i]) || !std::isfinite(upper[i])) {
      throw std::invalid_argument("BoxPolyhedron: bounds must be finite");
    }
    if (lower[i] > upper[i]) throw std::invalid_argument("BoxPolyhedron: lower > upper");
  }
}

double BoxPolyhedron::violation(const Vector& x) const {
  double v = 0.0;
  for (Index i = 0; i < x.size(); ++i) {
    v = std::max({v, lower[i] - x[i], x[i] - upper[i]});
  }
  for (Index j = 0; j < ineq_rhs.size(); ++j) {
    v = std::max(v, ineq_matrix.row(j).dot(x) - ineq_rhs[j]);
  }
  return v;
}

bool BoxPolyhedron::contains(const Vector& x, double tol) const {
  return x.size() == dimension() && violation(x) <= tol;
}

BoxPolyhedron BoxPolyhedron::translated(const Vector& center) const {
  BoxPolyhedron out;
  out.lower = lower - center;
  out.upper = upper - center;
  out.ineq_matrix = ineq_matrix;
  out.ineq_rhs = ineq_rhs;
  if (ineq_rhs.size() > 0) out.ineq_rhs -= ineq_matrix * center;
  if (out.ineq_matrix.rows() == 0) out.ineq_matrix.resize(0, center.size());
  return out;
}

Vector BoxPolyhedron::clamp(const Vector& x) const {
  return x.cwiseMax(lower).cwiseMin(upper);
}

void QpProblem::validate() const {
  const Index n = gradient.size();
  if (!(curvature > 0.0) || !std::isfinite(curvature)) {
    throw std::invalid_argument("QpProblem: curvature must be positive");
  }
  if (eq_jacobian.cols() != eq_residual.size()) {
    throw std::invalid_argument("QpProblem: eq_jacobian and eq_residual must both be present or absent");
  }
  if (eq_residual.size() > 0 && eq_jacobian.rows() != n) {
    throw std::invalid_argument("QpProblem: eq_jacobian must be n x m");
  }
  if (set.dimension() != n) throw std::invalid_argument("QpProblem: set dimension differs from gradient");
  set.validate();
}

std::string_view to_string(QpStatus status) {
  switch (status) {
    case QpStatus::Optimal:
      return "optimal";
    case QpStatus::Infeasible:
      return "infeasible";
    case QpStatus::NumericalFailure:
      return "numerical_failure";
  }
  return "unknown";
}

double QpSolution::lower_bound_multiplier(Index i) const { return std::max(-set_multiplier[i], 0.0); }

double QpSolution::upper_bound_multiplier(Index i) const { return std::max(set_multiplier[i], 0.0); }

Vector QpSolution::inequality_multipliers() const {
  const Index n = step.size();
  return set_multiplier.tail(set_multiplier.size() - n);
}

Vector QpSolution::normal(const BoxPolyhedron& set) const {
  const Index n = step.size();
  Vector v = set_multiplier.head(n);
  if (set.num_inequalities() > 0) v += set.ineq_matrix.transpose() * inequality_multipliers();
  return v;
}

double qp_objective(const QpProblem& problem, const Vector& step) {
  return problem.gradient.dot(step) + 0.5 * problem.curvature * step.squaredNorm();
}

namespace {

// Inequality rows of the set in the uniform form a_r' d <= b_r:
//   r in [0, n)       lower bounds   -d_i <= -lower_i
//   r in [n, 2n)      upper bounds    d_i <=  upper_i
//   r in [2n, 2n + p) general rows    A_j d <= b_j
class RowView {
 public:
  explicit RowView(const BoxPolyhedron& set) : set_(set), n_(set.dimension()) {}

  Index count() const { return 2 * n_ + set_.num_inequalities(); }

  double dot(Index r, const Vector& v) const {
    if (r < n_) return -v[r];
    if (r < 2 * n_) return v[r - n_];
    return set_.ineq_matrix.row(r - 2 * n_).dot(v);
  }

  double rhs(Index r) const {
    if (r < n_) return -set_.lower[r];
    if (r < 2 * n_) return set_.upper[r - n_];
    return set_.ineq_rhs[r - 2 * n_];
  }

  Vector vector(Index r) const {
    if (r < 2 * n_) {
      Vector e = Vector::Zero(n_);
      e[r % n_] = r < n_ ? -1.0 : 1.0;
      return e;
    }
    return set_.ineq_matrix.row(r - 2 * n_).transpose();
  }

 private:
  const BoxPolyhedron& set_;
  Index n_;
};

// Minimizer of g'd + (alpha/2)|d|^2 subject to E d = f for the rows kept
// after a Gram-Schmidt independence sweep. With E = L Q (Q orthonormal
// rows, L lower triangular) the solution is
//   d = Q' L^{-1} f - (I - Q'Q) g / alpha,   L' y = -Q (g + alpha d).
struct EqualitySolve {
  Vector step;
  Vector multipliers;       // one per input row, zero for dropped rows
  std::vector<bool> kept;   // per input row
};

EqualitySolve solve_equality_system(const std::vector<Vector>& rows, const Vector& rhs,
                                    const Vector& gradient, double alpha, double rank_tol) {
  const Index n = gradient.size();
  const Index k = static_cast<Index>(rows.size());
  EqualitySolve out;
  out.kept.assign(k, false);
  out.multipliers = Vector::Zero(k);

  std::vector<Vector> basis;
  std::vector<Index> kept_index;
  Matrix coeff = Matrix::Zero(k, k);  // L, indexed by kept order
  for (Index r = 0; r < k; ++r) {
    Vector residual = rows[r];
    Vector c = Vector::Zero(k);
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t b = 0; b < basis.size(); ++b) {
        const double proj = basis[b].dot(residual);
        residual -= proj * basis[b];
        c[static_cast<Index>(b)] += proj;
      }
    }
    const double norm = residual.norm();
    if (norm <= rank_tol * std::max(1.0, rows[r].norm())) continue;
    const Index slot = static_cast<Index>(basis.size());
    c[slot] = norm;
    coeff.row(slot) = c.transpose();
    basis.push_back(residual / norm);
    kept_index.push_back(r);
    out.kept[r] = true;
  }

  const Index rank = static_cast<Index>(basis.size());
  Matrix q(rank, n);
  for (Index b = 0; b < rank; ++b) q.row(b) = basis[b].transpose();
  const Matrix lower = coeff.topLeftCorner(rank, rank);
  Vector f(rank);
  for (Index b = 0; b < rank; ++b) f[b] = rhs[kept_index[b]];

  const Vector range_part = rank > 0 ? Vector(lower.triangularView<Eigen::Lower>().solve(f)) : Vector();
  Vector step = -gradient / alpha;
  if (rank > 0) {
    step -= q.transpose() * (q * step);
    step += q.transpose() * range_part;
  }
  out.step = step;
  if (rank > 0) {
    const Vector projected = q * (-(gradient + alpha * step));
    const Vector y = lower.transpose().triangularView<Eigen::Upper>().solve(projected);
    for (Index b = 0; b < rank; ++b) out.multipliers[kept_index[b]] = y[b];
  }
  return out;
}

// Phase one: minimize the l1 violation of the equality rows over the set,
// as an LP in w = d - lower and the split slacks.
struct PhaseOne {
  bool feasible = false;
  Vector point;
};

PhaseOne find_feasible_point(const QpProblem& problem, double phase1_tol) {
  const Index n = problem.dimension();
  const Index m = problem.num_equalities();
  const Index p = problem.set.num_inequalities();
  const BoxPolyhedron& set = problem.set;
  PhaseOne out;

  if (m == 0 && p == 0) {
    out.feasible = true;
    out.point = set.clamp(Vector::Zero(n));
    return out;
  }

  const Index vars = n + 2 * m;
  LpProblem lp;
  lp.cost = Vector::Zero(vars);
  lp.cost.tail(2 * m).setOnes();
  lp.lower = Vector::Zero(vars);
  lp.upper = Vector::Constant(vars, std::numeric_limits<double>::infinity());
  lp.upper.head(n) = set.upper - set.lower;
  lp.ineq_matrix = Matrix::Zero(p + 2 * m, vars);
  lp.ineq_rhs = Vector::Zero(p + 2 * m);
  if (p > 0) {
    lp.ineq_matrix.topLeftCorner(p, n) = set.ineq_matrix;
    lp.ineq_rhs.head(p) = set.ineq_rhs - set.ineq_matrix * set.lower;
  }
  if (m > 0) {
    // J' w - s_plus + s_minus = -c - J' lower, split into two rows.
    const Matrix jt = problem.eq_jacobian.transpose();
    const Vector target = -problem.eq_residual - jt * set.lower;
    Matrix row_block = Matrix::Zero(m, vars);
    row_block.leftCols(n) = jt;
    row_block.block(0, n, m, m) = -Matrix::Identity(m, m);
    row_block.block(0, n + m, m, m) = Matrix::Identity(m, m);
    lp.ineq_matrix.block(p, 0, m, vars) = row_block;
    lp.ineq_rhs.segment(p, m) = target;
    lp.ineq_matrix.block(p + m, 0, m, vars) = -row_block;
    lp.ineq_rhs.segment(p + m, m) = -target;
  }

  const LpSolution sol = solve_lp(lp);
  if (sol.status != LpStatus::Optimal) return out;
  if (sol.objective > phase1_tol) return out;
  out.feasible = true;
  out.point = set.clamp(set.lower + sol.primal.head(n));
  return out;
}

}  // namespace

double kkt_residual(const QpProblem& problem, const QpSolution& candidate) {
  const Index n = problem.dimension();
  const Index m = problem.num_equalities();
  const Index p = problem.set.num_inequalities();
  if (candidate.step.size() != n || candidate.eq_multipliers.size() != m ||
      candidate.set_multiplier.size() != n + p) {
    throw std::invalid_argument("kkt_residual: candidate dimensions do not match problem");
  }
  const BoxPolyhedron& set = problem.set;
  const Vector& d = candidate.step;

  Vector stationarity = problem.gradient + problem.curvature * d + candidate.normal(set);
  if (m > 0) stationarity += problem.eq_jacobian * candidate.eq_multipliers;
  double res = stationarity.lpNorm<Eigen::Infinity>();

  if (m > 0) {
    res = std::max(res, (problem.eq_jacobian.transpose() * d + problem.eq_residual).lpNorm<Eigen::Infinity>());
  }
  res = std::max(res, set.violation(d));

  for (Index i = 0; i < n; ++i) {
    const double v = candidate.set_multiplier[i];
    if (v < 0.0) {
      res = std::max(res, -v * std::abs(d[i] - set.lower[i]));
    } else if (v > 0.0) {
      res = std::max(res, v * std::abs(set.upper[i] - d[i]));
    }
  }
  for (Index j = 0; j < p; ++j) {
    const double mu = candidate.set_multiplier[n + j];
    res = std::max(res, -mu);
    res = std::max(res, std::abs(mu * (set.ineq_rhs[j] - set.ineq_matrix.row(j).dot(d))));
  }
  return res;
}

QpSolution solve_qp(const QpProblem& problem, double tol, int max_iter) {
  QpOptions options;
  options.tol = tol;
  options.max_iter = max_iter;
  return solve_qp(problem, options);
}

QpSolution solve_qp(const QpProblem& problem, const QpOptions& options) {
  problem.validate();
  if (!(options.tol > 0.0)) throw std::invalid_argument("solve_qp: tol must be positive");
  const Index n = problem.dimension();
  const Index m = problem.num_equalities();
  const Index p = problem.set.num_inequalities();
  const double alpha = problem.curvature;
  const int max_iter = options.max_iter > 0 ? options.max_iter : static_cast<int>(50 * (n + m + p));

  QpSolution sol;
  sol.step = Vector::Zero(n);
  sol.eq_multipliers = Vector::Zero(m);
  sol.set_multiplier = Vector::Zero(n + p);

  const PhaseOne start = find_feasible_point(problem, options.phase1_tol);
  if (!start.feasible) {
    sol.status = QpStatus::Infeasible;
    sol.kkt_residual = std::numeric_limits<double>::infinity();
    return sol;
  }

  const RowView rows(problem.set);
  const Index row_count = rows.count();
  std::vector<Index> working;
  std::vector<bool> in_working(row_count, false);
  std::vector<bool> ignored(row_count, false);

  Vector d = start.point;
  Vector multipliers;  // eq rows then working rows, from the latest solve
  const double scale = std::max({1.0, problem.gradient.lpNorm<Eigen::Infinity>(), alpha});
  const double step_eps = 1e-14 * scale;
  bool converged = false;

  int iter = 0;
  for (; iter < max_iter; ++iter) {
    std::vector<Vector> eq_rows;
    Vector rhs(m + static_cast<Index>(working.size()));
    for (Index j = 0; j < m; ++j) {
      eq_rows.push_back(problem.eq_jacobian.col(j));
      rhs[j] = -problem.eq_residual[j];
    }
    for (std::size_t w = 0; w < working.size(); ++w) {
      eq_rows.push_back(rows.vector(working[w]));
      rhs[m + static_cast<Index>(w)] = rows.rhs(working[w]);
    }
    EqualitySolve eqp = solve_equality_system(eq_rows, rhs, problem.gradient, alpha, options.rank_tol);

    // Dependent working rows are dropped and never re-enter.
    bool dropped = false;
    for (std::size_t w = 0; w < working.size(); ++w) {
      if (!eqp.kept[m + static_cast<Index>(w)]) {
        ignored[working[w]] = true;
        dropped = true;
      }
    }
    for (Index j = 0; j < m; ++j) {
      if (!eqp.kept[j]) sol.dropped_dependent_row = true;
    }
    if (dropped) {
      sol.dropped_dependent_row = true;
      std::vector<Index> next;
      for (Index r : working) {
        if (ignored[r]) {
          in_working[r] = false;
        } else {
          next.push_back(r);
        }
      }
      working = std::move(next);
      continue;
    }

    const Vector direction = eqp.step - d;
    if (direction.lpNorm<Eigen::Infinity>() > step_eps) {
      double t = 1.0;
      Index blocking = -1;
      for (Index r = 0; r < row_count; ++r) {
        if (in_working[r] || ignored[r]) continue;
        const double rate = rows.dot(r, direction);
        if (rate <= 1e-14 * std::max(1.0, direction.lpNorm<Eigen::Infinity>())) continue;
        const double slack = std::max(rows.rhs(r) - rows.dot(r, d), 0.0);
        const double limit = slack / rate;
        if (limit < t) {
          t = limit;
          blocking = r;
        }
      }
      if (blocking < 0) {
        d = eqp.step;
      } else {
        d += t * direction;
        working.push_back(blocking);
        in_working[blocking] = true;
        continue;
      }
    }

    multipliers = eqp.multipliers;
    // Most negative working-set multiplier leaves; ties go to the lowest row.
    const double drop_tol = 1e-11 * std::max(scale, alpha * d.lpNorm<Eigen::Infinity>());
    Index leave = -1;
    double most_negative = -drop_tol;
    for (std::size_t w = 0; w < working.size(); ++w) {
      const double mu = multipliers[m + static_cast<Index>(w)];
      if (mu < most_negative || (mu == most_negative && leave >= 0 && working[w] < working[leave])) {
        most_negative = mu;
        leave = static_cast<Index>(w);
      }
    }
    if (leave < 0) {
      converged = true;
      break;
    }
    in_working[working[leave]] = false;
    working.erase(working.begin() + leave);
  }

  sol.iterations = iter;
  sol.step = d;
  if (converged) {
    sol.eq_multipliers = multipliers.head(m);
    for (std::size_t w = 0; w < working.size(); ++w) {
      const Index r = working[w];
      const double mu = std::max(multipliers[m + static_cast<Index>(w)], 0.0);
      if (r < n) {
        sol.set_multiplier[r] -= mu;
      } else if (r < 2 * n) {
        sol.set_multiplier[r - n] += mu;
      } else {
        sol.set_multiplier[n + (r - 2 * n)] += mu;
      }
    }
  }
  sol.objective = qp_objective(problem, d);
  sol.kkt_residual = kkt_residual(problem, sol);
  sol.status = converged && sol.kkt_residual <= options.tol ? QpStatus::Optimal : QpStatus::NumericalFailure;
  return sol;
}

}  // namespace stosqp
