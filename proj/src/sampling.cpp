#include "stosqp/sampling.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <exception>
#include <thread>

namespace stosqp {

OracleFailure::OracleFailure(int scenario_index, const std::string& what)
    : std::runtime_error("oracle failed on scenario " + std::to_string(scenario_index) + ": " + what),
      scenario_index_(scenario_index) {}

SamplingStrategy SamplingStrategy::fixed(int n) {
  SamplingStrategy s;
  s.kind = StrategyKind::Fixed;
  s.fixed_size = n;
  s.cap = std::max(n, s.floor);
  s.validate();
  return s;
}

SamplingStrategy SamplingStrategy::polynomial(double exponent, int cap) {
  SamplingStrategy s;
  s.kind = StrategyKind::Polynomial;
  s.exponent = exponent;
  s.cap = cap;
  s.validate();
  return s;
}

SamplingStrategy SamplingStrategy::adaptive(double eta, int cap, int floor) {
  SamplingStrategy s;
  s.kind = StrategyKind::Adaptive;
  s.eta = eta;
  s.cap = cap;
  s.floor = floor;
  s.validate();
  return s;
}

namespace {

template <typename T>
T parse_number(std::string_view text, std::string_view what) {
  T value{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw std::invalid_argument("strategy: cannot parse " + std::string(what) + " from '" + std::string(text) + "'");
  }
  return value;
}

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = text.find(sep, start);
    parts.push_back(text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

}  // namespace

SamplingStrategy SamplingStrategy::parse(std::string_view text, double eta, int cap) {
  const auto parts = split(text, ':');
  if (parts[0] == "fixed" && parts.size() == 2) return fixed(parse_number<int>(parts[1], "sample size"));
  if (parts[0] == "poly" && parts.size() == 3) {
    return polynomial(parse_number<double>(parts[1], "exponent"), parse_number<int>(parts[2], "cap"));
  }
  if (parts[0] == "adaptive" && parts.size() == 1) return adaptive(eta, cap);
  throw std::invalid_argument("strategy: expected fixed:N, poly:EXP:CAP or adaptive, got '" + std::string(text) + "'");
}

void SamplingStrategy::validate() const {
  if (floor < 2) throw std::invalid_argument("strategy: floor must be at least 2");
  if (cap < floor) throw std::invalid_argument("strategy: cap must be at least floor");
  switch (kind) {
    case StrategyKind::Fixed:
      if (fixed_size < 2) throw std::invalid_argument("strategy: fixed sample size must be at least 2");
      break;
    case StrategyKind::Polynomial:
      if (!(exponent > 0.0)) throw std::invalid_argument("strategy: exponent must be positive");
      break;
    case StrategyKind::Adaptive:
      if (!(eta > 0.0)) throw std::invalid_argument("strategy: eta must be positive");
      break;
  }
}

int SamplingStrategy::initial_size() const {
  switch (kind) {
    case StrategyKind::Fixed:
      return fixed_size;
    case StrategyKind::Polynomial:
      return std::clamp(static_cast<int>(std::ceil(std::pow(0.0, exponent))), floor, cap);
    case StrategyKind::Adaptive:
      return floor;
  }
  return floor;
}

std::string SamplingStrategy::label() const {
  switch (kind) {
    case StrategyKind::Fixed:
      return "fixed" + std::to_string(fixed_size);
    case StrategyKind::Polynomial: {
      char buf[64];
      std::snprintf(buf, sizeof(buf), "poly%g", exponent);
      return buf;
    }
    case StrategyKind::Adaptive:
      return "adaptive";
  }
  return "unknown";
}

std::vector<Scenario> draw_scenarios(const ScenarioSampler& sampler, std::uint64_t master_seed,
                                     std::uint64_t iteration, int count) {
  if (count < 1) throw std::invalid_argument("draw_scenarios: count must be positive");
  CounterRng stream(derive_stream_key(master_seed, iteration));
  std::vector<Scenario> batch = sampler(stream, count);
  if (static_cast<int>(batch.size()) != count) {
    throw std::logic_error("draw_scenarios: sampler returned the wrong number of scenarios");
  }
  return batch;
}

SampleStats aggregate(const ConstrainedStochasticProblem& problem, const Vector& x,
                      const std::vector<Scenario>& scenarios, int workers) {
  const int count = static_cast<int>(scenarios.size());
  if (count < 2) throw std::invalid_argument("aggregate: batch size must be at least 2");

  std::vector<OracleValue> results(count);
  std::vector<std::exception_ptr> errors(count);
  auto evaluate = [&](int begin, int end) {
    for (int i = begin; i < end; ++i) {
      try {
        results[i] = problem.oracle(x, scenarios[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };

  const int threads = std::clamp(workers, 1, count);
  if (threads == 1) {
    evaluate(0, count);
  } else {
    std::vector<std::jthread> pool;
    const int chunk = (count + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
      const int begin = t * chunk;
      const int end = std::min(count, begin + chunk);
      if (begin < end) pool.emplace_back(evaluate, begin, end);
    }
  }

  for (int i = 0; i < count; ++i) {
    if (!errors[i]) continue;
    try {
      std::rethrow_exception(errors[i]);
    } catch (const std::exception& e) {
      throw OracleFailure(i, e.what());
    } catch (...) {
      throw OracleFailure(i, "unknown error");
    }
  }

  SampleStats stats;
  stats.batch_size = count;
  stats.mean_subgradient = Vector::Zero(results[0].subgradient.size());
  double value_sum = 0.0;
  for (int i = 0; i < count; ++i) {
    if (results[i].subgradient.size() != stats.mean_subgradient.size()) {
      throw OracleFailure(i, "subgradient has the wrong dimension");
    }
    value_sum += results[i].value;
    stats.mean_subgradient += results[i].subgradient;
  }
  stats.mean_value = value_sum / count;
  stats.mean_subgradient /= count;
  stats.subgradients.reserve(count);
  for (int i = 0; i < count; ++i) {
    stats.sum_sq_dev += (results[i].subgradient - stats.mean_subgradient).squaredNorm();
    stats.subgradients.push_back(std::move(results[i].subgradient));
  }
  return stats;
}

bool variance_test(const SampleStats& stats, double alpha, double step_norm_sq, double eta) {
  const double n = stats.batch_size;
  if (n < 2) throw std::invalid_argument("variance_test: batch size must be at least 2");
  return stats.sum_sq_dev / ((n - 1.0) * n) <= eta * alpha * step_norm_sq;
}

SampleSizeUpdate next_sample_size(const SamplingStrategy& strategy, const SampleStats& stats, double alpha,
                                  double step_norm_sq, int next_iteration) {
  const int current = stats.batch_size;
  switch (strategy.kind) {
    case StrategyKind::Fixed:
      return {current, SampleSizeEvent::Unchanged};
    case StrategyKind::Polynomial: {
      const double target = std::ceil(std::pow(static_cast<double>(next_iteration), strategy.exponent));
      const double clamped = std::clamp(target, static_cast<double>(strategy.floor), static_cast<double>(strategy.cap));
      return {std::max(current, static_cast<int>(clamped)), SampleSizeEvent::Scheduled};
    }
    case StrategyKind::Adaptive: {
      if (variance_test(stats, alpha, step_norm_sq, strategy.eta)) return {current, SampleSizeEvent::Unchanged};
      const double denom = strategy.eta * alpha * step_norm_sq * (current - 1);
      if (!(denom > 0.0)) return {strategy.cap, SampleSizeEvent::ZeroStepCap};
      const double target = std::ceil(stats.sum_sq_dev / denom);
      const double clamped = std::clamp(target, static_cast<double>(strategy.floor), static_cast<double>(strategy.cap));
      return {static_cast<int>(clamped), SampleSizeEvent::Increased};
    }
  }
  return {current, SampleSizeEvent::Unchanged};
}

}  // namespace stosqp
