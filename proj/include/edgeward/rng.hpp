#pragma once

#include <cstdint>
#include <random>

namespace edgeward {

// Scenario PRNG. The engine is std::mt19937_64, whose output sequence is fixed
// by the standard; the helpers below avoid the std distributions because their
// algorithms differ between standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform double in [0, 1) from the top 53 bits.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n) by rejection sampling; n > 0.
  std::uint64_t below(std::uint64_t n);

  // Inverse-CDF exponential draw with the given mean.
  double exponential(double mean);

 private:
  std::mt19937_64 engine_;
};

// SplitMix64 finaliser, used to derive independent child seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace edgeward
