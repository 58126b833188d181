#include <gtest/gtest.h>

#include <cmath>

#include "stosqp/bench/synthetic.hpp"
#include "stosqp/sampling.hpp"

using namespace stosqp;

namespace {

ConstrainedStochasticProblem noisy_linear(int n) {
  ConstrainedStochasticProblem problem;
  problem.dimension = n;
  problem.sampler = [n](CounterRng& rng, int count) {
    std::vector<Scenario> out;
    for (int s = 0; s < count; ++s) {
      Scenario xi(n);
      for (int i = 0; i < n; ++i) xi(i) = rng.uniform() - 0.5;
      out.push_back(xi);
    }
    return out;
  };
  problem.oracle = [](const Vector& x, const Scenario& xi) { return OracleValue{xi.dot(x), xi}; };
  problem.set = BoxPolyhedron::box(Vector::Constant(n, -1.0), Vector::Constant(n, 1.0));
  return problem;
}

SampleStats stats_with(double sum_sq_dev, int n) {
  SampleStats s;
  s.sum_sq_dev = sum_sq_dev;
  s.batch_size = n;
  return s;
}

}  // namespace

TEST(Strategy, ParsesDescriptors) {
  const auto fixed = SamplingStrategy::parse("fixed:100");
  EXPECT_EQ(fixed.kind, StrategyKind::Fixed);
  EXPECT_EQ(fixed.initial_size(), 100);
  EXPECT_EQ(fixed.label(), "fixed100");
  const auto poly = SamplingStrategy::parse("poly:1.25:1000");
  EXPECT_EQ(poly.kind, StrategyKind::Polynomial);
  EXPECT_DOUBLE_EQ(poly.exponent, 1.25);
  EXPECT_EQ(poly.cap, 1000);
  const auto adaptive = SamplingStrategy::parse("adaptive", 2.0, 500);
  EXPECT_EQ(adaptive.kind, StrategyKind::Adaptive);
  EXPECT_EQ(adaptive.initial_size(), 2);
  EXPECT_DOUBLE_EQ(adaptive.eta, 2.0);
  EXPECT_EQ(adaptive.cap, 500);
  for (const char* bad : {"fixed", "fixed:x", "fixed:1", "poly:1.25", "poly:-1:10", "adaptive:3", "sometimes"}) {
    EXPECT_THROW(SamplingStrategy::parse(bad), std::invalid_argument) << bad;
  }
}

TEST(Strategy, FixedNeverChanges) {
  const auto s = SamplingStrategy::fixed(10);
  const auto u = next_sample_size(s, stats_with(1e6, 10), 1.0, 0.0, 5);
  EXPECT_EQ(u.size, 10);
  EXPECT_EQ(u.event, SampleSizeEvent::Unchanged);
}

TEST(Strategy, PolynomialScheduleIsClampedAndMonotone) {
  const auto s = SamplingStrategy::polynomial(1.25, 1000);
  EXPECT_EQ(s.initial_size(), 2);
  int n = s.initial_size();
  int previous = n;
  for (int k = 1; k < 400; ++k) {
    n = next_sample_size(s, stats_with(0.0, n), 1.0, 1.0, k).size;
    const int expected = std::clamp(static_cast<int>(std::ceil(std::pow(k, 1.25))), 2, 1000);
    EXPECT_EQ(n, std::max(previous, expected)) << k;
    EXPECT_GE(n, previous);
    previous = n;
  }
  EXPECT_EQ(n, 1000);
}

TEST(Strategy, AdaptiveKeepsSizeWhenTestPasses) {
  const auto s = SamplingStrategy::adaptive(1.0, 1000);
  // SS / ((N - 1) N) = 10 / 20 = 0.5 <= eta alpha |d|^2 = 1
  const auto u = next_sample_size(s, stats_with(10.0, 5), 1.0, 1.0, 1);
  EXPECT_EQ(u.size, 5);
  EXPECT_EQ(u.event, SampleSizeEvent::Unchanged);
}

TEST(Strategy, AdaptiveRatioRule) {
  const auto s = SamplingStrategy::adaptive(1.0, 1000);
  // fails: 400 / 20 = 20 > 2 * 0.5; N' = ceil(400 / (1 * 2 * 0.5 * 4)) = 100
  const auto u = next_sample_size(s, stats_with(400.0, 5), 2.0, 0.5, 1);
  EXPECT_EQ(u.size, 100);
  EXPECT_EQ(u.event, SampleSizeEvent::Increased);
  const auto capped = next_sample_size(s, stats_with(4e6, 5), 2.0, 0.5, 1);
  EXPECT_EQ(capped.size, 1000);
}

TEST(Strategy, AdaptiveZeroStepGoesToCap) {
  const auto s = SamplingStrategy::adaptive(1.0, 300);
  const auto u = next_sample_size(s, stats_with(1.0, 4), 1.0, 0.0, 1);
  EXPECT_EQ(u.size, 300);
  EXPECT_EQ(u.event, SampleSizeEvent::ZeroStepCap);
  // zero variance and zero step: the test passes
  EXPECT_EQ(next_sample_size(s, stats_with(0.0, 4), 1.0, 0.0, 1).size, 4);
}

TEST(Sampling, DrawsAreSeedDeterministic) {
  const auto problem = noisy_linear(3);
  const auto a = draw_scenarios(problem.sampler, 42, 7, 50);
  const auto b = draw_scenarios(problem.sampler, 42, 7, 50);
  const auto c = draw_scenarios(problem.sampler, 42, 8, 50);
  const auto d = draw_scenarios(problem.sampler, 43, 7, 50);
  ASSERT_EQ(a.size(), 50u);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i], b[i]);
  EXPECT_NE(a[0], c[0]);
  EXPECT_NE(a[0], d[0]);
}

TEST(Sampling, AggregateMatchesDirectComputation) {
  const auto problem = noisy_linear(4);
  const auto batch = draw_scenarios(problem.sampler, 1, 0, 37);
  const Vector x = Vector::Constant(4, 0.25);
  const SampleStats stats = aggregate(problem, x, batch);
  Vector mean = Vector::Zero(4);
  double value = 0.0;
  for (const auto& xi : batch) {
    mean += xi;
    value += xi.dot(x);
  }
  mean /= 37.0;
  double ss = 0.0;
  for (const auto& xi : batch) ss += (xi - mean).squaredNorm();
  EXPECT_NEAR(stats.mean_value, value / 37.0, 1e-14);
  EXPECT_LE((stats.mean_subgradient - mean).norm(), 1e-14);
  EXPECT_NEAR(stats.sum_sq_dev, ss, 1e-12);
  EXPECT_EQ(stats.batch_size, 37);
}

TEST(Sampling, AggregateIsIndependentOfWorkerCount) {
  const auto problem = noisy_linear(5);
  const auto batch = draw_scenarios(problem.sampler, 9, 3, 101);
  const Vector x = Vector::Constant(5, -0.3);
  const SampleStats one = aggregate(problem, x, batch, 1);
  for (int workers : {2, 3, 8}) {
    const SampleStats many = aggregate(problem, x, batch, workers);
    EXPECT_EQ(one.mean_value, many.mean_value);
    EXPECT_EQ(one.sum_sq_dev, many.sum_sq_dev);
    EXPECT_EQ(one.mean_subgradient, many.mean_subgradient);
  }
}

TEST(Sampling, OracleFailureNamesTheScenario) {
  auto problem = noisy_linear(2);
  problem.oracle = [](const Vector& x, const Scenario& xi) -> OracleValue {
    if (xi(0) > 0.3) throw std::runtime_error("second stage infeasible");
    return {0.0, x};
  };
  const auto batch = draw_scenarios(problem.sampler, 5, 0, 40);
  int first = -1;
  for (int i = 0; i < 40; ++i) {
    if (batch[i](0) > 0.3) {
      first = i;
      break;
    }
  }
  ASSERT_GE(first, 0);
  try {
    aggregate(problem, Vector::Zero(2), batch, 4);
    FAIL() << "expected OracleFailure";
  } catch (const OracleFailure& e) {
    EXPECT_EQ(e.scenario_index(), first);
    EXPECT_NE(std::string(e.what()).find("scenario " + std::to_string(first)), std::string::npos);
  }
}

TEST(Sampling, VarianceTestFormula) {
  EXPECT_TRUE(variance_test(stats_with(6.0, 3), 1.0, 1.0, 1.0));   // 1 <= 1
  EXPECT_FALSE(variance_test(stats_with(6.1, 3), 1.0, 1.0, 1.0));  // 1.0167 > 1
  EXPECT_THROW(variance_test(stats_with(1.0, 1), 1.0, 1.0, 1.0), std::invalid_argument);
}
