#pragma once

#include <cstdint>
#include <limits>

namespace stosqp {

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t value);

/// Key of the scenario substream used at `iteration` of a run seeded with
/// `master_seed`.
std::uint64_t derive_stream_key(std::uint64_t master_seed, std::uint64_t iteration);

/// Counter-based generator: the i-th output is a pure function of
/// (key, i). Satisfies UniformRandomBitGenerator.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit CounterRng(std::uint64_t key) : key_(key) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform();

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace stosqp
