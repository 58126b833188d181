#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "stosqp/model.hpp"
#include "stosqp/types.hpp"

namespace stosqp {

/// Batch statistics of the per-scenario oracle outputs at one point.
struct SampleStats {
  double mean_value = 0.0;
  Vector mean_subgradient;
  double sum_sq_dev = 0.0;  // sum_i |G_i - mean|^2
  int batch_size = 0;
  // Per-scenario subgradients in scenario order, kept so sum_sq_dev can be
  // recomputed.
  std::vector<Vector> subgradients;
};

/// Raised when the oracle throws for a scenario; names the scenario index.
class OracleFailure : public std::runtime_error {
 public:
  OracleFailure(int scenario_index, const std::string& what);
  int scenario_index() const { return scenario_index_; }

 private:
  int scenario_index_;
};

enum class StrategyKind { Fixed, Polynomial, Adaptive };

/// Sample-size schedule.
///   Fixed:      N_k = fixed_size
///   Polynomial: N_k = ceil(k^exponent) clamped to [floor, cap], never decreasing
///   Adaptive:   variance-test driven update, clamped to [floor, cap]
struct SamplingStrategy {
  StrategyKind kind = StrategyKind::Fixed;
  int fixed_size = 10;
  double exponent = 1.25;
  int cap = 1000;
  int floor = 2;
  double eta = 1.0;

  static SamplingStrategy fixed(int n);
  static SamplingStrategy polynomial(double exponent, int cap);
  static SamplingStrategy adaptive(double eta, int cap, int floor = 2);

  /// Parses "fixed:N", "poly:EXP:CAP" or "adaptive" (eta/cap taken from the
  /// arguments). Throws std::invalid_argument on malformed input.
  static SamplingStrategy parse(std::string_view text, double eta = 1.0, int cap = 1000);

  void validate() const;
  int initial_size() const;
  std::string label() const;
};

/// Scenarios for `iteration` drawn from the substream keyed by
/// (master_seed, iteration). Identical arguments give identical batches.
std::vector<Scenario> draw_scenarios(const ScenarioSampler& sampler, std::uint64_t master_seed,
                                     std::uint64_t iteration, int count);

/// Evaluates the oracle on every scenario and reduces in scenario order.
/// `workers` > 1 fans the oracle calls out over threads; the result does not
/// depend on the worker count.
SampleStats aggregate(const ConstrainedStochasticProblem& problem, const Vector& x,
                      const std::vector<Scenario>& scenarios, int workers = 1);

/// sum_sq_dev / ((N - 1) N) <= eta * alpha * step_norm_sq
bool variance_test(const SampleStats& stats, double alpha, double step_norm_sq, double eta);

enum class SampleSizeEvent {
  Unchanged,     // fixed schedule, or the variance test passed
  Scheduled,     // polynomial schedule value
  Increased,     // adaptive ratio rule
  ZeroStepCap,   // adaptive with a zero step and residual variance
};

struct SampleSizeUpdate {
  int size = 0;
  SampleSizeEvent event = SampleSizeEvent::Unchanged;
};

/// Size of the batch for iteration `next_iteration`, given the statistics of
/// the batch just used (size stats.batch_size).
SampleSizeUpdate next_sample_size(const SamplingStrategy& strategy, const SampleStats& stats, double alpha,
                                  double step_norm_sq, int next_iteration);

}  // namespace stosqp
