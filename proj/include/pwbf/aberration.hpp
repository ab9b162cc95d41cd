#pragma once

#include "pwbf/rng.hpp"
#include "pwbf/tensor.hpp"

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace pwbf {

// Speed of sound used by the beamformer for each (scanline, plane wave):
// c + w with w ~ U(-sigma, sigma), independent per cell.
struct AberrationProfile {
  Matrix<double> sos; // L x K [m/s]
  double sigma{};
  std::uint64_t seed{};

  [[nodiscard]] std::size_t num_scanlines() const { return sos.rows(); }
  [[nodiscard]] std::size_t num_planewaves() const { return sos.cols(); }
};

inline std::vector<double> sigma_levels() { return {0.0, 1.54, 3.85}; }

inline AberrationProfile sample_profile(double c, double sigma, std::size_t L,
                                        std::size_t K, std::uint64_t seed) {
  if (!(sigma >= 0.0)) {
    throw std::invalid_argument("aberration: sigma must be >= 0");
  }
  if (L < 1 || K < 1) {
    throw std::invalid_argument("aberration: L and K must be >= 1");
  }
  AberrationProfile p{Matrix<double>(L, K, c), sigma, seed};
  if (sigma == 0.0) {
    return p;
  }
  const CounterRng rng(seed, /*stream=*/0xAB);
  for (std::size_t l = 0; l < L; ++l) {
    for (std::size_t k = 0; k < K; ++k) {
      // u in [0, 1) maps to [-1, 1), so c + sigma * w never leaves the bound.
      const double w = 2.0 * rng.uniform(l * K + k) - 1.0;
      p.sos(l, k) = c + sigma * w;
    }
  }
  return p;
}

// Constant profile; equivalent to sample_profile with sigma = 0.
inline AberrationProfile uniform_profile(double c, std::size_t L,
                                         std::size_t K) {
  return sample_profile(c, 0.0, L, K, 0);
}

} // namespace pwbf
