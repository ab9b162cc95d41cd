#pragma once

#include <cstdint>

namespace pwbf {

// Counter-based generator: value(key, counter) = splitmix64 finalizer of
// key + (counter + 1) * golden gamma. Every draw is addressable, so filling
// a matrix in any order (or in parallel) gives the same numbers on every
// platform.
class CounterRng {
public:
  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

  explicit constexpr CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
      : key_(mix(seed ^ mix(stream + kGamma))) {}

  static constexpr std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  [[nodiscard]] constexpr std::uint64_t bits(std::uint64_t counter) const {
    return mix(key_ + (counter + 1) * kGamma);
  }

  // Uniform on [0, 1) with 53 random bits.
  [[nodiscard]] constexpr double uniform(std::uint64_t counter) const {
    return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53;
  }

  // Uniform on [lo, hi].
  [[nodiscard]] constexpr double uniform(std::uint64_t counter, double lo,
                                         double hi) const {
    return lo + (hi - lo) * uniform(counter);
  }

private:
  std::uint64_t key_;
};

} // namespace pwbf
