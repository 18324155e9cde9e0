#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace bvqa::data {

/// Mersenne Twister with explicitly defined real-valued draws, so streams
/// are bit-identical across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);
  /// Standard normal via Box-Muller.
  double normal();

 private:
  std::mt19937_64 engine_;
};

/// Derives an independent stream seed from a root seed, a purpose tag and an
/// index (splitmix64 finalizer over an FNV-1a tag hash).
std::uint64_t derive_seed(std::uint64_t root, std::string_view tag, std::uint64_t index = 0);

}  // namespace bvqa::data
