#pragma once

#include <cstdint>
#include <random>

namespace ste {

/// SplitMix64 finalizer applied to (seed, stream): independent child seeds
/// without any shared generator state.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// Seeded 64-bit Mersenne Twister with the few draws the library needs.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  bool bernoulli(double p) { return uniform() < p; }
  double normal() { return normal_(engine_); }
  /// Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace ste
