#include "stosqp/rng.hpp"

namespace stosqp {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
}

std::uint64_t mix64(std::uint64_t z) {
  z += kGolden;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t derive_stream_key(std::uint64_t master_seed, std::uint64_t iteration) {
  return mix64(mix64(master_seed) ^ mix64(iteration * kGolden + 0x632BE59BD9B4E019ULL));
}

CounterRng::result_type CounterRng::operator()() {
  ++counter_;
  return mix64(key_ ^ (counter_ * kGolden));
}

double CounterRng::uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

}  // namespace stosqp
