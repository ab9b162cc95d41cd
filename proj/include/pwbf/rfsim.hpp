#pragma once

#include "pwbf/config.hpp"
#include "pwbf/parallel.hpp"
#include "pwbf/rng.hpp"
#include "pwbf/tensor.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace pwbf {

struct SimulationError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct Scatterer {
  double x{};         // lateral [m]
  double z{};         // depth [m], >= 0
  double amplitude{}; // reflectivity, |amplitude| <= 1
};

struct Phantom {
  std::vector<Scatterer> scatterers;
  double true_sos{1540.0};
};

// Raw channel data, samples(n, element, planewave). Time of sample n is
// t0 + n / fs.
struct RfCube {
  Tensor3<double> samples;
  double fs{};
  double t0{};

  [[nodiscard]] std::size_t num_samples() const { return samples.dim(0); }
  [[nodiscard]] std::size_t num_elements() const { return samples.dim(1); }
  [[nodiscard]] std::size_t num_planewaves() const { return samples.dim(2); }
};

// Standard deviation of the Gaussian envelope for a given -6 dB fractional
// bandwidth.
inline double pulse_sigma(double fc, double frac_bw) {
  return std::sqrt(2.0 * std::numbers::ln2) /
         (std::numbers::pi * fc * frac_bw);
}

// Gaussian-modulated cosine pulse-echo response. Even in t, peak 1 at t = 0.
inline double gauss_pulse(double t, double fc, double frac_bw) {
  const double s = pulse_sigma(fc, frac_bw);
  return std::cos(2.0 * std::numbers::pi * fc * t) *
         std::exp(-t * t / (2.0 * s * s));
}

// The simulator truncates the pulse where its envelope is below 1e-9.
inline constexpr double kPulseSupportSigmas = 6.5;

// Two-way arrival time of the echo of a point at (x, z) for a plane wave
// steered by `angle`, received on the element at `element_x`.
inline double echo_delay(double x, double z, double element_x, double angle,
                         double sos) {
  const double dx = x - element_x;
  return (z * std::cos(angle) + x * std::sin(angle) +
          std::sqrt(z * z + dx * dx)) /
         sos;
}

// Time needed to record every echo from depths up to `max_depth` anywhere
// under the aperture, plus the pulse tail.
inline double required_duration(const ProbeConfig &probe,
                                const AngleSet &angles, double max_depth,
                                double sos, double frac_bw = 0.6) {
  const double half = 0.5 * probe.lateral_extent();
  double worst = 0.0;
  for (double th : angles.angles) {
    for (double x : {-half, half}) {
      for (double xe : {-half, half}) {
        worst = std::max(worst, echo_delay(x, max_depth, xe, th, sos));
      }
    }
  }
  return worst + kPulseSupportSigmas *
                     pulse_sigma(probe.center_frequency, frac_bw);
}

namespace detail {

// Per-run pulse tables. With u = u0 + n dt the echo samples factor as
//   cos(w u) = cos(w u0) C[n] - sin(w u0) S[n]
//   exp(-u^2 / 2s^2) = exp(-u0^2 / 2s^2) * R^n * G[n],  R = exp(-u0 dt / s^2)
// so an echo costs one sincos and two exps plus independent per-sample work.
struct PulseKernel {
  double fs, t0, dt, omega, inv2s2, support;
  std::vector<double> cos_tab, sin_tab, gauss_tab;

  PulseKernel(double fs_, double t0_, double fc, double sigma)
      : fs(fs_), t0(t0_), dt(1.0 / fs_), omega(2.0 * std::numbers::pi * fc),
        inv2s2(1.0 / (2.0 * sigma * sigma)),
        support(kPulseSupportSigmas * sigma) {
    const auto width =
        static_cast<std::size_t>(std::ceil(2.0 * support * fs)) + 2;
    cos_tab.resize(width);
    sin_tab.resize(width);
    gauss_tab.resize(width);
    for (std::size_t n = 0; n < width; ++n) {
      const double t = static_cast<double>(n) * dt;
      cos_tab[n] = std::cos(omega * t);
      sin_tab[n] = std::sin(omega * t);
      gauss_tab[n] = std::exp(-t * t * inv2s2);
    }
  }

  // trace[n] += amplitude * gauss_pulse(n / fs + t0 - tau) over the support.
  void add(std::vector<double> &trace, double tau, double amplitude) const {
    const auto nt = static_cast<std::int64_t>(trace.size());
    const auto lo = std::max<std::int64_t>(
        0, static_cast<std::int64_t>(std::ceil((tau - support - t0) * fs)));
    const auto hi = std::min<std::int64_t>(
        nt - 1,
        static_cast<std::int64_t>(std::floor((tau + support - t0) * fs)));
    if (lo > hi) {
      return;
    }
    const auto count = std::min(static_cast<std::size_t>(hi - lo + 1),
                                cos_tab.size());
    const double u0 = static_cast<double>(lo) * dt + t0 - tau;
    const double c0 = std::cos(omega * u0);
    const double s0 = std::sin(omega * u0);
    const double e0 = amplitude * std::exp(-u0 * u0 * inv2s2);
    const double r = std::exp(-2.0 * u0 * dt * inv2s2);

    // R^n as R^(8q) * R^j, keeping the dependent chains short.
    std::array<double, 8> low{};
    low[0] = 1.0;
    for (std::size_t j = 1; j < 8; ++j) {
      low[j] = low[j - 1] * r;
    }
    const double r8 = low[7] * r;
    double high = e0;

    double *out = trace.data() + lo;
    for (std::size_t base = 0; base < count; base += 8) {
      const std::size_t end = std::min(count, base + 8);
      for (std::size_t n = base; n < end; ++n) {
        const double carrier = c0 * cos_tab[n] - s0 * sin_tab[n];
        out[n] += carrier * (high * low[n - base]) * gauss_tab[n];
      }
      high *= r8;
    }
  }
};

} // namespace detail

// Linear point-scatterer model: each scatterer returns a delayed copy of the
// pulse on every element, no attenuation or directivity.
inline RfCube simulate(const Phantom &phantom, const ProbeConfig &probe,
                       const AngleSet &angles, double duration,
                       double frac_bw = 0.6) {
  probe.validate();
  if (!(phantom.true_sos >= 1000.0 && phantom.true_sos <= 2000.0)) {
    throw SimulationError("phantom true_sos must be in [1000, 2000] m/s");
  }
  const double half_aperture = 0.5 * probe.lateral_extent();
  double max_depth = 0.0;
  for (const auto &s : phantom.scatterers) {
    if (!(s.z >= 0.0)) {
      throw SimulationError("scatterer depth must be >= 0");
    }
    if (std::abs(s.x) > 1.5 * half_aperture) {
      throw SimulationError("scatterer outside the lateral aperture +/- 50%");
    }
    max_depth = std::max(max_depth, s.z);
  }
  if (duration < 2.0 * max_depth / phantom.true_sos) {
    throw SimulationError("duration shorter than the deepest round trip");
  }

  const double fs = probe.sampling_frequency;
  const double fc = probe.center_frequency;
  const double sigma = pulse_sigma(fc, frac_bw);
  const std::size_t nt =
      static_cast<std::size_t>(std::ceil(duration * fs)) + 1;
  const std::size_t ne = probe.num_elements;
  const std::size_t nk = angles.size();

  RfCube cube{Tensor3<double>(nt, ne, nk), fs, 0.0};
  const detail::PulseKernel kernel(fs, cube.t0, fc, sigma);
  parallel_for(ne * nk, [&](std::size_t pair) {
    const std::size_t i = pair / nk;
    const std::size_t k = pair % nk;
    const double xe = probe.element_x(i);
    const double cos_t = std::cos(angles.angles[k]);
    const double sin_t = std::sin(angles.angles[k]);
    const double inv_c = 1.0 / phantom.true_sos;
    std::vector<double> trace(nt, 0.0);
    for (const auto &s : phantom.scatterers) {
      if (s.amplitude == 0.0) {
        continue;
      }
      const double dx = s.x - xe;
      const double tau =
          (s.z * cos_t + s.x * sin_t + std::sqrt(s.z * s.z + dx * dx)) * inv_c;
      kernel.add(trace, tau, s.amplitude);
    }
    for (std::size_t n = 0; n < nt; ++n) {
      cube.samples(n, i, k) = trace[n];
    }
  });
  return cube;
}

enum class PhantomKind { Hypoechoic, Hyperechoic, PointTargets };

inline std::string to_string(PhantomKind k) {
  switch (k) {
  case PhantomKind::Hypoechoic:
    return "hypoechoic";
  case PhantomKind::Hyperechoic:
    return "hyperechoic";
  case PhantomKind::PointTargets:
    return "point_targets";
  }
  return "?";
}

inline PhantomKind parse_phantom_kind(const std::string &s) {
  if (s == "hypoechoic") {
    return PhantomKind::Hypoechoic;
  }
  if (s == "hyperechoic") {
    return PhantomKind::Hyperechoic;
  }
  if (s == "point_targets") {
    return PhantomKind::PointTargets;
  }
  throw SimulationError("unknown phantom kind: " + s);
}

struct PhantomSpec {
  // Speckle region
  double lateral_half_width{19.1e-3};
  double depth_min{14.0e-3};
  double depth_max{26.0e-3};
  double scatterers_per_cell{4.0}; // per wavelength^2
  double wavelength{1540.0 / 8.48e6};
  // Inclusion
  double cyst_x{0.0};
  double cyst_z{20.0e-3};
  double cyst_radius{3.0e-3};
  double hypo_db{-30.0};
  double hyper_db{12.0};
  double true_sos{1540.0};

  [[nodiscard]] bool inside_cyst(double x, double z) const {
    const double dx = x - cyst_x;
    const double dz = z - cyst_z;
    return dx * dx + dz * dz <= cyst_radius * cyst_radius;
  }
};

// Region sized to a probe's aperture, depth window centered on the cyst.
inline PhantomSpec phantom_spec_for(const ProbeConfig &probe) {
  PhantomSpec spec;
  spec.lateral_half_width = 0.5 * probe.lateral_extent();
  spec.wavelength = probe.wavelength(spec.true_sos);
  return spec;
}

inline std::vector<double> point_target_depths() {
  return {10.0e-3, 20.0e-3, 30.0e-3, 40.0e-3, 50.0e-3};
}

inline Phantom make_cyst_phantom(PhantomKind kind, std::uint64_t seed,
                                 const PhantomSpec &spec = {}) {
  Phantom ph;
  ph.true_sos = spec.true_sos;
  if (kind == PhantomKind::PointTargets) {
    for (double z : point_target_depths()) {
      ph.scatterers.push_back({0.0, z, 1.0});
    }
    return ph;
  }

  const double width = 2.0 * spec.lateral_half_width;
  const double height = spec.depth_max - spec.depth_min;
  const double cell = spec.wavelength * spec.wavelength;
  const auto count = static_cast<std::size_t>(
      std::ceil(spec.scatterers_per_cell * width * height / cell));

  // Amplitudes stay within [-1, 1]: the hyperechoic background is scaled
  // down instead of scaling the inclusion up.
  const double background =
      kind == PhantomKind::Hyperechoic ? std::pow(10.0, -spec.hyper_db / 20.0)
                                       : 1.0;
  const double inclusion =
      kind == PhantomKind::Hyperechoic
          ? 1.0
          : background * std::pow(10.0, spec.hypo_db / 20.0);

  const CounterRng rng(seed, /*stream=*/0x5CA7);
  ph.scatterers.reserve(count);
  for (std::size_t j = 0; j < count; ++j) {
    const double x = rng.uniform(3 * j, -spec.lateral_half_width,
                                 spec.lateral_half_width);
    const double z = rng.uniform(3 * j + 1, spec.depth_min, spec.depth_max);
    const double u = rng.uniform(3 * j + 2, -1.0, 1.0);
    const double scale = spec.inside_cyst(x, z) ? inclusion : background;
    ph.scatterers.push_back({x, z, scale * u});
  }
  return ph;
}

} // namespace pwbf
