#include "stosqp/bench/pps.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "stosqp/bench/truncated_normal.hpp"
#include "stosqp/lp.hpp"

namespace stosqp::bench {

void PpsInstance::validate() const {
  if (factories < 1 || stores < 1) throw std::invalid_argument("pps: need at least one factory and one store");
  if (production_costs.size() != factories) throw std::invalid_argument("pps: production_costs must have M entries");
  if (shipment_costs.rows() != factories || shipment_costs.cols() != stores) {
    throw std::invalid_argument("pps: shipment_costs must be M x N");
  }
  if (static_cast<int>(slope_intervals.size()) != stores || static_cast<int>(intercept_intervals.size()) != stores) {
    throw std::invalid_argument("pps: need one slope and one intercept interval per store");
  }
  for (const auto& s : slope_intervals) {
    if (!(s.lo < s.hi && s.hi < 0.0)) throw std::invalid_argument("pps: slope intervals must be strictly negative");
  }
  for (const auto& b : intercept_intervals) {
    if (!(b.lo < b.hi && b.lo > 0.0)) throw std::invalid_argument("pps: intercept intervals must be positive");
  }
  if (!(price_bounds.lo < price_bounds.hi)) throw std::invalid_argument("pps: empty price range");
}

PpsInstance build_pps_instance() {
  PpsInstance inst;
  inst.production_costs.resize(5);
  inst.production_costs << 2.2, 3.2, 3.3, 4.2, 2.4;
  inst.shipment_costs = Matrix::Constant(5, 5, 2.0);
  inst.slope_intervals = {{-1.5, -0.5}, {-2.0, -1.0}, {-2.5, -1.5}, {-3.0, -2.0}, {-2.5, -1.5}};
  inst.intercept_intervals = {{16.0, 17.0}, {21.0, 22.0}, {26.0, 27.0}, {31.0, 32.0}, {26.0, 27.0}};
  inst.validate();
  return inst;
}

Scenario encode(const PpsScenario& scenario) {
  Scenario out(scenario.slopes.size() + scenario.intercepts.size());
  out << scenario.slopes, scenario.intercepts;
  return out;
}

PpsScenario decode(const Scenario& payload, int stores) {
  if (payload.size() != 2 * stores) throw std::invalid_argument("pps: scenario payload has the wrong length");
  return {payload.head(stores), payload.tail(stores)};
}

std::vector<Scenario> sample_pps_scenarios(const PpsInstance& instance, CounterRng& stream, int count) {
  std::vector<TruncatedNormal> slopes, intercepts;
  for (int j = 0; j < instance.stores; ++j) {
    slopes.push_back(TruncatedNormal::on_interval(instance.slope_intervals[j].lo, instance.slope_intervals[j].hi));
    intercepts.push_back(
        TruncatedNormal::on_interval(instance.intercept_intervals[j].lo, instance.intercept_intervals[j].hi));
  }
  std::vector<Scenario> out;
  out.reserve(count);
  for (int s = 0; s < count; ++s) {
    Scenario xi(2 * instance.stores);
    for (int j = 0; j < instance.stores; ++j) xi(j) = sample_truncated_normal(slopes[j], stream);
    for (int j = 0; j < instance.stores; ++j) xi(instance.stores + j) = sample_truncated_normal(intercepts[j], stream);
    out.push_back(std::move(xi));
  }
  return out;
}

SecondStage solve_second_stage(const PpsInstance& instance, double price, const PpsScenario& scenario) {
  const int m = instance.factories;
  const int n = instance.stores;
  const int vars = m + m * n;
  const auto zi = [&](int i, int j) { return m + i * n + j; };

  LpProblem lp;
  lp.cost.resize(vars);
  lp.cost.head(m) = instance.production_costs;
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) lp.cost(zi(i, j)) = instance.shipment_costs(i, j) - price;
  }
  lp.ineq_matrix = Matrix::Zero(n + m, vars);
  lp.ineq_rhs.resize(n + m);
  Vector rhs_slope = Vector::Zero(n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < m; ++i) lp.ineq_matrix(j, zi(i, j)) = 1.0;
    const double rhs = scenario.slopes(j) * price + scenario.intercepts(j);
    lp.ineq_rhs(j) = std::max(0.0, rhs);
    if (rhs > 0.0) rhs_slope(j) = scenario.slopes(j);
  }
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) lp.ineq_matrix(n + i, zi(i, j)) = 1.0;
    lp.ineq_matrix(n + i, i) = -1.0;
    lp.ineq_rhs(n + i) = 0.0;
  }
  lp.lower = Vector::Zero(vars);
  lp.lower.head(m).setConstant(instance.quantity_floor);
  lp.upper = Vector::Constant(vars, std::numeric_limits<double>::infinity());

  const LpSolution sol = solve_lp(lp);
  if (sol.status != LpStatus::Optimal) {
    throw std::runtime_error("second-stage LP " + std::string(to_string(sol.status)));
  }

  SecondStage out;
  out.value = sol.objective;
  out.production = sol.primal.head(m);
  out.shipments.resize(m, n);
  double shipped = 0.0;
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      out.shipments(i, j) = sol.primal(zi(i, j));
      shipped += sol.primal(zi(i, j));
    }
  }
  out.demand_duals = sol.duals.head(n);
  out.capacity_duals = sol.duals.tail(m);
  out.dvalue_dp = -shipped - out.demand_duals.dot(rhs_slope);
  return out;
}

OracleValue pps_oracle(const PpsInstance& instance, const Vector& first_stage, const Scenario& scenario) {
  if (first_stage.size() != 2) throw std::invalid_argument("pps_oracle: first stage is (x, p)");
  const double x = first_stage(0);
  const double p = first_stage(1);
  const SecondStage second = solve_second_stage(instance, p, decode(scenario, instance.stores));
  OracleValue out;
  out.value = (instance.first_stage_cost - p) * x + second.value;
  out.subgradient.resize(2);
  out.subgradient << instance.first_stage_cost - p, -x + second.dvalue_dp;
  return out;
}

BoxPolyhedron pps_feasible_set(const PpsInstance& instance) {
  const double a0 = instance.demand_slope0;
  const double b0 = instance.demand_intercept0;
  const double x_max = std::max(a0 * instance.price_bounds.lo, a0 * instance.price_bounds.hi) + b0;
  if (!(x_max >= instance.quantity_floor)) throw std::invalid_argument("pps: first-stage set is empty");
  BoxPolyhedron set;
  set.lower.resize(2);
  set.lower << instance.quantity_floor, instance.price_bounds.lo;
  set.upper.resize(2);
  set.upper << x_max, instance.price_bounds.hi;
  set.ineq_matrix.resize(1, 2);
  set.ineq_matrix << 1.0, -a0;
  set.ineq_rhs.resize(1);
  set.ineq_rhs << b0;
  set.validate();
  return set;
}

PpsScenario mean_scenario(const PpsInstance& instance) {
  PpsScenario out{Vector(instance.stores), Vector(instance.stores)};
  for (int j = 0; j < instance.stores; ++j) {
    out.slopes(j) = 0.5 * (instance.slope_intervals[j].lo + instance.slope_intervals[j].hi);
    out.intercepts(j) = 0.5 * (instance.intercept_intervals[j].lo + instance.intercept_intervals[j].hi);
  }
  return out;
}

OracleValue pps_expected_oracle(const PpsInstance& instance, const Vector& first_stage) {
  return pps_oracle(instance, first_stage, encode(mean_scenario(instance)));
}

bool second_stage_affine_on_support(const PpsInstance& instance, double price, double tol) {
  const int n = instance.stores;
  if (2 * n > 20) throw std::invalid_argument("second_stage_affine_on_support: too many vertices");
  const PpsScenario center = mean_scenario(instance);
  for (int j = 0; j < n; ++j) {
    if (center.slopes(j) * price + center.intercepts(j) <= 0.0) return false;
  }
  const SecondStage base = solve_second_stage(instance, price, center);
  // dR/d(rhs_j) = -mu_j with rhs_j = slope_j p + intercept_j.
  for (unsigned mask = 0; mask < (1u << (2 * n)); ++mask) {
    PpsScenario v = center;
    for (int j = 0; j < n; ++j) {
      v.slopes(j) = (mask >> j) & 1u ? instance.slope_intervals[j].hi : instance.slope_intervals[j].lo;
      v.intercepts(j) = (mask >> (n + j)) & 1u ? instance.intercept_intervals[j].hi : instance.intercept_intervals[j].lo;
      if (v.slopes(j) * price + v.intercepts(j) < 0.0) return false;
    }
    double linear = base.value;
    for (int j = 0; j < n; ++j) {
      const double drhs = (v.slopes(j) - center.slopes(j)) * price + (v.intercepts(j) - center.intercepts(j));
      linear -= base.demand_duals(j) * drhs;
    }
    const double value = solve_second_stage(instance, price, v).value;
    if (std::abs(value - linear) > tol * (1.0 + std::abs(value))) return false;
  }
  return true;
}

ConstrainedStochasticProblem make_pps_problem(const PpsInstance& instance, double rho) {
  instance.validate();
  ConstrainedStochasticProblem problem;
  problem.dimension = 2;
  problem.sampler = [instance](CounterRng& stream, int count) { return sample_pps_scenarios(instance, stream, count); };
  problem.oracle = [instance](const Vector& x, const Scenario& xi) { return pps_oracle(instance, x, xi); };
  problem.expected = [instance](const Vector& x) { return pps_expected_oracle(instance, x); };
  problem.set = pps_feasible_set(instance);
  problem.rho_estimate = rho;
  return problem;
}

PpsReference::PpsReference(PpsInstance instance, std::uint64_t seed, int count) : instance_(std::move(instance)) {
  instance_.validate();
  CounterRng stream(derive_stream_key(seed, 0));
  for (const auto& payload : sample_pps_scenarios(instance_, stream, count)) {
    scenarios_.push_back(decode(payload, instance_.stores));
  }
}

OracleValue PpsReference::expected(const Vector& first_stage) const {
  const double x = first_stage(0);
  const double p = first_stage(1);
  const auto [value, slope] = second_stage_mean(p);
  OracleValue out;
  out.value = (instance_.first_stage_cost - p) * x + value;
  out.subgradient.resize(2);
  out.subgradient << instance_.first_stage_cost - p, -x + slope;
  return out;
}

std::pair<double, double> PpsReference::second_stage_mean(double price) const {
  double value = 0.0;
  double slope = 0.0;
  for (const auto& xi : scenarios_) {
    const SecondStage s = solve_second_stage(instance_, price, xi);
    value += s.value;
    slope += s.dvalue_dp;
  }
  const double n = static_cast<double>(scenarios_.size());
  return {value / n, slope / n};
}

std::vector<CurvePoint> pps_curve(const PpsReference& reference, int points) {
  if (points < 2) throw std::invalid_argument("pps_curve: need at least two grid points");
  const Interval range = reference.instance().price_bounds;
  std::vector<CurvePoint> out;
  out.reserve(points);
  for (int i = 0; i < points; ++i) {
    const double p = range.lo + (range.hi - range.lo) * i / (points - 1);
    const auto [value, slope] = reference.second_stage_mean(p);
    out.push_back({p, value, slope});
  }
  return out;
}

}  // namespace stosqp::bench
