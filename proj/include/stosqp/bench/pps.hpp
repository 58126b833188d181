#pragma once

#include <cstdint>
#include <vector>

#include "stosqp/diagnostics.hpp"
#include "stosqp/model.hpp"
#include "stosqp/types.hpp"

namespace stosqp::bench {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Two-stage production, pricing and shipment instance. First-stage
/// variables are (x, p): quantity and price.
struct PpsInstance {
  int factories = 5;
  int stores = 5;
  double first_stage_cost = 4.2;
  Vector production_costs;  // M
  Matrix shipment_costs;    // M x N
  double demand_slope0 = -1.0;
  double demand_intercept0 = 12.0;
  std::vector<Interval> slope_intervals;      // N
  std::vector<Interval> intercept_intervals;  // N
  Interval price_bounds{1.0, 10.0};
  double quantity_floor = 1.0;

  void validate() const;
};

PpsInstance build_pps_instance();

struct PpsScenario {
  Vector slopes;      // alpha_j(xi)
  Vector intercepts;  // beta_j(xi)
};

/// Scenario payload layout: slopes followed by intercepts.
Scenario encode(const PpsScenario& scenario);
PpsScenario decode(const Scenario& payload, int stores);

/// Independent truncated-normal draws per store, slopes then intercepts.
std::vector<Scenario> sample_pps_scenarios(const PpsInstance& instance, CounterRng& stream, int count);

struct SecondStage {
  double value = 0.0;     // R(p, xi)
  double dvalue_dp = 0.0; // Lagrangian partial derivative in p
  Vector production;      // y
  Matrix shipments;       // z, M x N
  Vector demand_duals;    // N
  Vector capacity_duals;  // M
};

/// Solves the second-stage LP at price p. A negative demand right-hand side
/// is treated as zero demand.
SecondStage solve_second_stage(const PpsInstance& instance, double price, const PpsScenario& scenario);

/// Value (c1 - p) x + R(p, xi) and its subgradient over (x, p).
OracleValue pps_oracle(const PpsInstance& instance, const Vector& first_stage, const Scenario& scenario);

/// {p in price_bounds, x >= floor, x <= alpha0 p + beta0}; the x upper bound
/// is the largest value the last row allows.
BoxPolyhedron pps_feasible_set(const PpsInstance& instance);

/// Scenario at the interval midpoints, which is the mean of every
/// truncated-normal coordinate.
PpsScenario mean_scenario(const PpsInstance& instance);

/// Exact E[(c1 - p) x + R(p, xi)] and its gradient, evaluated as the oracle at
/// the mean scenario. Valid wherever R(p, .) is affine on the scenario
/// support; see second_stage_affine_on_support.
OracleValue pps_expected_oracle(const PpsInstance& instance, const Vector& first_stage);

/// True when R(p, .) agrees with its linearization at the mean scenario on
/// every vertex of the support box (within tol). R(p, .) is convex, so
/// agreement at the vertices and the center forces it to be affine on the box.
bool second_stage_affine_on_support(const PpsInstance& instance, double price, double tol = 1e-8);

/// Production/pricing/shipment problem over (x, p). `expected` is pps_expected_oracle.
ConstrainedStochasticProblem make_pps_problem(const PpsInstance& instance, double rho = 10.0);

inline constexpr std::uint64_t kReferenceSeed = 987654321;
inline constexpr int kReferenceBatch = 1000;

/// Frozen scenario batch used as the stand-in for the exact expectation.
class PpsReference {
 public:
  PpsReference(PpsInstance instance, std::uint64_t seed = kReferenceSeed, int count = kReferenceBatch);

  OracleValue expected(const Vector& first_stage) const;
  Vector gradient(const Vector& first_stage) const { return expected(first_stage).subgradient; }

  /// Batch mean of R(p, xi) and of dR/dp.
  std::pair<double, double> second_stage_mean(double price) const;

  const std::vector<PpsScenario>& scenarios() const { return scenarios_; }
  const PpsInstance& instance() const { return instance_; }

 private:
  PpsInstance instance_;
  std::vector<PpsScenario> scenarios_;
};

struct CurvePoint {
  double price = 0.0;
  double value = 0.0;
  double subgradient = 0.0;
};

/// Batch-mean second-stage value and derivative on an evenly spaced price grid.
std::vector<CurvePoint> pps_curve(const PpsReference& reference, int points = 200);

}  // namespace stosqp::bench
