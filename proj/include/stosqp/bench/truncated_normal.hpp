#pragma once

#include <atomic>

#include "stosqp/rng.hpp"

namespace stosqp::bench {

/// Normal(mean, stddev) restricted to [lower, upper] by rejection.
struct TruncatedNormal {
  double lower = 0.0;
  double upper = 1.0;
  double mean = 0.5;
  double stddev = 0.25;

  /// mean = (a + b) / 2, stddev = (b - a) / 4.
  static TruncatedNormal on_interval(double a, double b);

  void validate() const;

  /// Density of the truncated law at t (0 outside [lower, upper]).
  double density(double t) const;
};

inline constexpr int kMaxRejections = 10000;

/// One draw. After kMaxRejections rejected proposals the interval midpoint
/// is returned and the global fallback counter is incremented.
double sample_truncated_normal(const TruncatedNormal& law, CounterRng& stream);
double sample_truncated_normal(double a, double b, CounterRng& stream);

/// Number of midpoint fallbacks since process start.
long long truncated_normal_fallbacks();

}  // namespace stosqp::bench
