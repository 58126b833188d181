#include "stosqp/bench/synthetic.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace stosqp::bench {

double QuadraticPiece::value(const Vector& x) const { return a + b.dot(x) + 0.5 * x.dot(Q * x); }

Vector QuadraticPiece::gradient(const Vector& x) const { return b + Q * x; }

SyntheticUc2Spec SyntheticUc2Spec::from_pieces(std::vector<QuadraticPiece> pieces) {
  SyntheticUc2Spec spec;
  spec.pieces = std::move(pieces);
  if (spec.pieces.empty()) throw std::invalid_argument("uc2: need at least one piece");
  for (const auto& piece : spec.pieces) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(piece.Q);
    spec.rho = std::max(spec.rho, eig.eigenvalues().maxCoeff());
  }
  spec.validate();
  return spec;
}

int SyntheticUc2Spec::dimension() const { return pieces.empty() ? 0 : static_cast<int>(pieces[0].b.size()); }

void SyntheticUc2Spec::validate() const {
  if (pieces.empty()) throw std::invalid_argument("uc2: need at least one piece");
  const Index n = pieces[0].b.size();
  double top = 0.0;
  for (const auto& piece : pieces) {
    if (piece.b.size() != n || piece.Q.rows() != n || piece.Q.cols() != n) {
      throw std::invalid_argument("uc2: piece dimensions disagree");
    }
    if (!piece.Q.isApprox(piece.Q.transpose())) throw std::invalid_argument("uc2: Q must be symmetric");
    Eigen::SelfAdjointEigenSolver<Matrix> eig(piece.Q);
    if (eig.eigenvalues().minCoeff() < -1e-12) throw std::invalid_argument("uc2: Q must be positive semidefinite");
    top = std::max(top, eig.eigenvalues().maxCoeff());
  }
  if (rho < top * (1.0 - 1e-12)) throw std::invalid_argument("uc2: rho below the largest piece curvature");
}

int SyntheticUc2Spec::active_piece(const Vector& x) const {
  int best = 0;
  double best_value = pieces[0].value(x);
  for (int t = 1; t < static_cast<int>(pieces.size()); ++t) {
    const double v = pieces[t].value(x);
    if (v < best_value) {
      best = t;
      best_value = v;
    }
  }
  return best;
}

double SyntheticUc2Spec::value(const Vector& x) const { return pieces[active_piece(x)].value(x); }

Vector SyntheticUc2Spec::subgradient(const Vector& x) const { return pieces[active_piece(x)].gradient(x); }

namespace {

std::vector<Scenario> uniform_box_scenarios(CounterRng& stream, int count, int dimension, double width) {
  std::vector<Scenario> out;
  out.reserve(count);
  for (int s = 0; s < count; ++s) {
    Scenario xi(dimension);
    for (int i = 0; i < dimension; ++i) xi(i) = width * (2.0 * stream.uniform() - 1.0);
    out.push_back(std::move(xi));
  }
  return out;
}

}  // namespace

ConstrainedStochasticProblem build_synthetic_uc2(const SyntheticUc2Spec& spec, double noise_width,
                                                 const BoxPolyhedron& set) {
  spec.validate();
  if (!(noise_width >= 0.0)) throw std::invalid_argument("uc2: noise width must be nonnegative");
  const int n = spec.dimension();
  ConstrainedStochasticProblem problem;
  problem.dimension = n;
  problem.sampler = [n, noise_width](CounterRng& stream, int count) {
    return uniform_box_scenarios(stream, count, n, noise_width);
  };
  problem.oracle = [spec](const Vector& x, const Scenario& xi) {
    return OracleValue{spec.value(x) + xi.dot(x), spec.subgradient(x) + xi};
  };
  problem.expected = [spec](const Vector& x) { return OracleValue{spec.value(x), spec.subgradient(x)}; };
  problem.set = set;
  problem.rho_estimate = spec.rho > 0.0 ? spec.rho : 1.0;
  return problem;
}

SyntheticUc2Spec crossing_pieces_spec(const Vector& curvatures) {
  const Index n = curvatures.size();
  if (n < 1) throw std::invalid_argument("crossing_pieces_spec: empty curvature vector");
  QuadraticPiece left{0.0, Vector::Zero(n), curvatures.asDiagonal().toDenseMatrix()};
  QuadraticPiece right = left;
  left.b(0) = 1.0;
  right.b(0) = -1.0;
  return SyntheticUc2Spec::from_pieces({left, right});
}

double abs_equality_expected(double x1, double noise_width) {
  const double w = noise_width;
  if (w == 0.0) return -std::abs(x1);
  if (std::abs(x1) >= w) return -std::abs(x1);
  // E|x1 - xi| for xi ~ U[-w, w] and |x1| < w is (x1^2 + w^2) / (2w).
  return -(x1 * x1 + w * w) / (2.0 * w);
}

ConstrainedStochasticProblem make_abs_equality_problem(double noise_width, double rho) {
  if (!(noise_width >= 0.0 && noise_width < 1.0)) throw std::invalid_argument("abs problem: need 0 <= w < 1");
  ConstrainedStochasticProblem problem;
  problem.dimension = 2;
  problem.sampler = [noise_width](CounterRng& stream, int count) {
    return uniform_box_scenarios(stream, count, 1, noise_width);
  };
  problem.oracle = [](const Vector& x, const Scenario& xi) {
    const double u = x(0) - xi(0);
    Vector g = Vector::Zero(2);
    g(0) = u >= 0.0 ? -1.0 : 1.0;
    return OracleValue{-std::abs(u), g};
  };
  problem.expected = [noise_width](const Vector& x) {
    Vector g = Vector::Zero(2);
    const double w = noise_width;
    if (x(0) >= w) {
      g(0) = -1.0;
    } else if (x(0) <= -w) {
      g(0) = 1.0;
    } else {
      g(0) = -x(0) / w;
    }
    return OracleValue{abs_equality_expected(x(0), w), g};
  };
  problem.eq_constraints = [](const Vector& x) {
    ConstraintValue c;
    c.value = Vector::Constant(1, x(0) + x(1) - 1.0);
    c.jacobian = Matrix::Ones(2, 1);
    return c;
  };
  problem.set = BoxPolyhedron::box(Vector::Constant(2, -2.0), Vector::Constant(2, 2.0));
  problem.rho_estimate = rho;
  problem.lipschitz_h = 0.0;
  return problem;
}

ConstrainedStochasticProblem make_quadratic_constraint_problem(const SyntheticUc2Spec& spec, double noise_width) {
  if (spec.dimension() != 2) throw std::invalid_argument("quadratic constraint problem: spec must be 2-dimensional");
  Vector lower(2), upper(2);
  lower << 0.5, -2.0;
  upper << 2.0, 2.0;
  ConstrainedStochasticProblem problem = build_synthetic_uc2(spec, noise_width, BoxPolyhedron::box(lower, upper));
  problem.eq_constraints = [](const Vector& x) {
    ConstraintValue c;
    c.value = Vector::Constant(1, x(0) * x(0) - 1.0);
    c.jacobian = Matrix::Zero(2, 1);
    c.jacobian(0, 0) = 2.0 * x(0);
    return c;
  };
  problem.lipschitz_h = 2.0;
  return problem;
}

double suggest_rho(const std::function<double(const Vector&)>& value,
                   const std::function<Vector(const Vector&)>& subgradient, const BoxPolyhedron& set, int samples,
                   std::uint64_t seed) {
  set.validate();
  if (samples < 1) throw std::invalid_argument("suggest_rho: samples must be positive");
  CounterRng stream(derive_stream_key(seed, 0));
  const Index n = set.dimension();
  const auto draw = [&]() {
    for (int attempt = 0; attempt < 1000; ++attempt) {
      Vector x(n);
      for (Index i = 0; i < n; ++i) x(i) = set.lower(i) + (set.upper(i) - set.lower(i)) * stream.uniform();
      if (set.contains(x)) return x;
    }
    throw std::runtime_error("suggest_rho: could not sample a point of the set");
  };
  double rho = 0.0;
  for (int s = 0; s < samples; ++s) {
    const Vector x = draw();
    const Vector y = draw();
    const Vector d = y - x;
    const double dn2 = d.squaredNorm();
    if (dn2 == 0.0) continue;
    const double gap = value(y) - value(x) - subgradient(x).dot(d);
    rho = std::max(rho, 2.0 * gap / dn2);
  }
  return rho;
}

}  // namespace stosqp::bench
