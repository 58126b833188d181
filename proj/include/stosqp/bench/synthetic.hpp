#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "stosqp/model.hpp"
#include "stosqp/types.hpp"

namespace stosqp::bench {

/// q(x) = a + b'x + x'Qx/2 with Q symmetric positive semidefinite.
struct QuadraticPiece {
  double a = 0.0;
  Vector b;
  Matrix Q;

  double value(const Vector& x) const;
  Vector gradient(const Vector& x) const;
};

/// r(x) = min_t q_t(x). Every piece satisfies q(x + d) = q(x) + grad'd + d'Qd/2,
/// so r is upper-C2 with rho = max_t lambda_max(Q_t), and the bound is attained
/// along the top eigenvector of the attaining piece.
struct SyntheticUc2Spec {
  std::vector<QuadraticPiece> pieces;
  double rho = 0.0;

  /// Fills rho from the pieces.
  static SyntheticUc2Spec from_pieces(std::vector<QuadraticPiece> pieces);

  int dimension() const;
  void validate() const;

  /// Lowest index attaining the minimum.
  int active_piece(const Vector& x) const;
  double value(const Vector& x) const;
  Vector subgradient(const Vector& x) const;
};

/// Scenario xi ~ U[-w, w]^n shifts every b_t, so
///   R(x, xi) = r(x) + xi'x  and  E[R(x, xi)] = r(x).
/// The expected oracle returns r and the attaining piece's gradient exactly.
ConstrainedStochasticProblem build_synthetic_uc2(const SyntheticUc2Spec& spec, double noise_width,
                                                 const BoxPolyhedron& set);

/// Two pieces crossing at x_1 = 0: r(x) = x'Qx/2 - |x_1| + (shift)'x with Q
/// diagonal. Used by tests and the selftest.
SyntheticUc2Spec crossing_pieces_spec(const Vector& curvatures);

/// minimize E[-|x_1 - xi|] with xi ~ U[-w, w] subject to x_1 + x_2 = 1 on [-2, 2]^2.
/// Minimizer (2, -1) for w < 1.
ConstrainedStochasticProblem make_abs_equality_problem(double noise_width = 0.2, double rho = 1.0);

/// Expected objective of make_abs_equality_problem in closed form.
double abs_equality_expected(double x1, double noise_width);

/// minimize the uc2 objective of `spec` (n = 2) subject to x_1^2 - 1 = 0 on
/// [0.5, 2] x [-2, 2]. lipschitz_h = 2.
ConstrainedStochasticProblem make_quadratic_constraint_problem(const SyntheticUc2Spec& spec, double noise_width);

/// 2 max (r(x') - r(x) - g(x)'(x' - x)) / |x' - x|^2 over `samples` pairs drawn
/// uniformly from the box of `set` (pairs outside the set are redrawn).
double suggest_rho(const std::function<double(const Vector&)>& value,
                   const std::function<Vector(const Vector&)>& subgradient, const BoxPolyhedron& set, int samples,
                   std::uint64_t seed);

}  // namespace stosqp::bench
