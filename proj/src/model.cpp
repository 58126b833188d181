#include "stosqp/model.hpp"

#include <stdexcept>

namespace stosqp {

int ConstrainedStochasticProblem::num_equalities(const Vector& x) const {
  if (!eq_constraints) return 0;
  return static_cast<int>((*eq_constraints)(x).value.size());
}

void ConstrainedStochasticProblem::validate() const {
  if (dimension <= 0) throw std::invalid_argument("problem: dimension must be positive");
  if (!sampler) throw std::invalid_argument("problem: missing scenario sampler");
  if (!oracle) throw std::invalid_argument("problem: missing oracle");
  if (set.dimension() != dimension) throw std::invalid_argument("problem: set dimension mismatch");
  set.validate();
  if (!(rho_estimate > 0.0)) throw std::invalid_argument("problem: rho_estimate must be positive");
  if (!(lipschitz_h >= 0.0)) throw std::invalid_argument("problem: lipschitz_h must be nonnegative");
}

double model_value(const LocalModel& model, const Vector& d) {
  if (d.size() != model.gradient.size()) throw std::invalid_argument("model_value: dimension mismatch");
  return model.value_at_center + model.gradient.dot(d) + 0.5 * model.curvature * d.squaredNorm();
}

double predicted_decrease(const LocalModel& model, const Vector& d) {
  if (d.size() != model.gradient.size()) throw std::invalid_argument("predicted_decrease: dimension mismatch");
  return -model.gradient.dot(d) - 0.5 * model.curvature * d.squaredNorm();
}

double predicted_decrease_with_step(const LocalModel& model, const Vector& d, double beta) {
  if (!(beta > 0.0 && beta <= 1.0)) {
    throw std::invalid_argument("predicted_decrease_with_step: beta must lie in (0, 1]");
  }
  if (d.size() != model.gradient.size()) {
    throw std::invalid_argument("predicted_decrease_with_step: dimension mismatch");
  }
  return -beta * model.gradient.dot(d) - 0.5 * model.curvature * beta * beta * d.squaredNorm();
}

double merit_value(double objective_value, const Vector& c_value, double theta) {
  if (!(theta > 0.0)) throw std::invalid_argument("merit_value: theta must be positive");
  return objective_value + theta * c_value.lpNorm<1>();
}

double upper_c2_gap(double r_at_x, double r_at_xd, const Vector& g, const Vector& d) {
  if (g.size() != d.size()) throw std::invalid_argument("upper_c2_gap: dimension mismatch");
  return r_at_xd - r_at_x - g.dot(d);
}

}  // namespace stosqp
