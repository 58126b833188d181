#include "stosqp/bench/truncated_normal.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace stosqp::bench {

namespace {
std::atomic<long long> g_fallbacks{0};
}

TruncatedNormal TruncatedNormal::on_interval(double a, double b) {
  TruncatedNormal law{a, b, 0.5 * (a + b), 0.25 * (b - a)};
  law.validate();
  return law;
}

void TruncatedNormal::validate() const {
  if (!(lower < upper)) throw std::invalid_argument("truncated normal: need lower < upper");
  if (!(stddev > 0.0)) throw std::invalid_argument("truncated normal: stddev must be positive");
}

double TruncatedNormal::density(double t) const {
  if (t < lower || t > upper) return 0.0;
  const auto cdf = [&](double v) { return 0.5 * std::erfc(-(v - mean) / (stddev * std::numbers::sqrt2)); };
  const double mass = cdf(upper) - cdf(lower);
  const double z = (t - mean) / stddev;
  return std::exp(-0.5 * z * z) / (stddev * std::sqrt(2.0 * std::numbers::pi) * mass);
}

double sample_truncated_normal(const TruncatedNormal& law, CounterRng& stream) {
  std::normal_distribution<double> normal(law.mean, law.stddev);
  for (int attempt = 0; attempt < kMaxRejections; ++attempt) {
    const double t = normal(stream);
    if (t >= law.lower && t <= law.upper) return t;
  }
  g_fallbacks.fetch_add(1, std::memory_order_relaxed);
  return 0.5 * (law.lower + law.upper);
}

double sample_truncated_normal(double a, double b, CounterRng& stream) {
  return sample_truncated_normal(TruncatedNormal::on_interval(a, b), stream);
}

long long truncated_normal_fallbacks() { return g_fallbacks.load(std::memory_order_relaxed); }

}  // namespace stosqp::bench
