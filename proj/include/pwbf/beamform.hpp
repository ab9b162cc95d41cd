#pragma once

#include "pwbf/aberration.hpp"
#include "pwbf/config.hpp"
#include "pwbf/parallel.hpp"
#include "pwbf/rfsim.hpp"
#include "pwbf/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

namespace pwbf {

struct BeamformError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Per-plane-wave delay-and-sum images, z(a, l, k).
struct DasTensor {
  Tensor3<double> z;
  ImagingConfig imaging{};
  AngleSet angles{};

  [[nodiscard]] std::size_t depth() const { return z.dim(0); }
  [[nodiscard]] std::size_t lines() const { return z.dim(1); }
  [[nodiscard]] std::size_t planewaves() const { return z.dim(2); }
};

// Transmit path of a steered plane wave plus the receive path back to the
// element, divided by the speed of sound.
inline double tof(double x, double z, double element_x, double angle,
                  double c) {
  return echo_delay(x, z, element_x, angle, c);
}

// Receive weight of an element `dx` meters from the pixel at depth z.
// Returns 0 outside the dynamic aperture of half-width z / (2 F).
inline double apodization_weight(const ApodizationSpec &apod, double dx,
                                 double z) {
  const double half = z / (2.0 * apod.f_number);
  const double adx = std::abs(dx);
  if (adx > half) {
    return 0.0;
  }
  if (apod.window == ApodizationSpec::Window::Rectangular) {
    return 1.0;
  }
  if (half == 0.0) {
    return 1.0; // only dx == 0 reaches here
  }
  return 0.5 * (1.0 + std::cos(std::numbers::pi * adx / half));
}

// Linear interpolation of a uniformly sampled trace at fractional index s;
// zero outside [0, n - 1].
inline double sample_linear(std::span<const double> trace, double s) {
  const double last = static_cast<double>(trace.size() - 1);
  if (!(s >= 0.0) || s > last) {
    return 0.0;
  }
  const auto i0 = static_cast<std::size_t>(s);
  if (i0 + 1 >= trace.size()) {
    return trace[i0];
  }
  const double frac = s - static_cast<double>(i0);
  return trace[i0] + frac * (trace[i0 + 1] - trace[i0]);
}

namespace detail {

inline void check_cube(const RfCube &cube, const ImagingConfig &cfg,
                       const ProbeConfig &probe) {
  if (cube.num_elements() != probe.num_elements ||
      cfg.num_scanlines != probe.num_elements) {
    throw BeamformError("beamform: cube/probe/imaging element count mismatch");
  }
  if (cube.num_samples() < 1) {
    throw BeamformError("beamform: empty cube");
  }
}

// Lookup tables shared by every plane wave: receive distance and weight as a
// function of (depth index, |scanline - element|). Valid because scanlines
// sit on element centers.
struct ReceiveTables {
  std::size_t lines{};
  std::vector<double> distance;     // A x Ne
  std::vector<double> weight;       // A x Ne
  std::vector<std::size_t> reach;   // A: max |l - i| with nonzero weight

  ReceiveTables(const ProbeConfig &probe, const ApodizationSpec &apod,
                std::span<const double> depths)
      : lines(probe.num_elements), distance(depths.size() * lines),
        weight(depths.size() * lines), reach(depths.size(), 0) {
    for (std::size_t a = 0; a < depths.size(); ++a) {
      const double z = depths[a];
      for (std::size_t d = 0; d < lines; ++d) {
        const double dx = static_cast<double>(d) * probe.pitch;
        distance[a * lines + d] = std::sqrt(z * z + dx * dx);
        const double w = apodization_weight(apod, dx, z);
        weight[a * lines + d] = w;
        if (w != 0.0) {
          reach[a] = d;
        }
      }
    }
  }
};

inline Matrix<double> das_slab(const RfCube &cube, std::size_t k, double angle,
                               std::span<const double> c_per_line,
                               const ReceiveTables &rx,
                               const PixelGrid &grid) {
  const std::size_t nt = cube.num_samples();
  const std::size_t ne = cube.num_elements();
  const std::size_t na = grid.depths.size();

  // Element-major copy of slab k so each trace is contiguous.
  std::vector<double> traces(ne * nt);
  for (std::size_t n = 0; n < nt; ++n) {
    for (std::size_t i = 0; i < ne; ++i) {
      traces[i * nt + n] = cube.samples(n, i, k);
    }
  }

  const double cos_t = std::cos(angle);
  const double sin_t = std::sin(angle);
  Matrix<double> img(na, ne);
  parallel_for(ne, [&](std::size_t l) {
    const double x = grid.laterals[l];
    const double c = c_per_line[l];
    const double fs_over_c = cube.fs / c;
    const double t0s = cube.t0 * cube.fs;
    for (std::size_t a = 0; a < na; ++a) {
      const double tx = grid.depths[a] * cos_t + x * sin_t;
      const std::size_t reach = rx.reach[a];
      const std::size_t i_lo = l >= reach ? l - reach : 0;
      const std::size_t i_hi = std::min(ne - 1, l + reach);
      const double *dist = &rx.distance[a * rx.lines];
      const double *wt = &rx.weight[a * rx.lines];
      double acc = 0.0;
      std::size_t active = 0;
      for (std::size_t i = i_lo; i <= i_hi; ++i) {
        const std::size_t d = i > l ? i - l : l - i;
        const double w = wt[d];
        if (w == 0.0) {
          continue;
        }
        ++active;
        const double s = (tx + dist[d]) * fs_over_c - t0s;
        acc += w * sample_linear(
                       std::span<const double>(&traces[i * nt], nt), s);
      }
      img(a, l) = active > 0 ? acc / static_cast<double>(active) : 0.0;
    }
  });
  return img;
}

} // namespace detail

// Delay-and-sum image of plane wave k with one speed of sound per scanline.
inline Matrix<double> das_single(const RfCube &cube, std::size_t k,
                                 const AngleSet &angles,
                                 std::span<const double> c_per_line,
                                 const ApodizationSpec &apod,
                                 const ImagingConfig &cfg,
                                 const ProbeConfig &probe) {
  detail::check_cube(cube, cfg, probe);
  apod.validate();
  if (k >= cube.num_planewaves() || k >= angles.size()) {
    throw BeamformError("beamform: plane-wave index out of range");
  }
  if (c_per_line.size() != cfg.num_scanlines) {
    throw BeamformError("beamform: need one speed of sound per scanline");
  }
  const PixelGrid grid = pixel_grid(cfg, probe);
  const detail::ReceiveTables rx(probe, apod, grid.depths);
  return detail::das_slab(cube, k, angles.angles[k], c_per_line, rx, grid);
}

inline DasTensor das_all(const RfCube &cube, const AberrationProfile &profile,
                         const ApodizationSpec &apod, const ImagingConfig &cfg,
                         const ProbeConfig &probe, const AngleSet &angles) {
  detail::check_cube(cube, cfg, probe);
  apod.validate();
  const std::size_t nk = cube.num_planewaves();
  if (angles.size() != nk) {
    throw BeamformError("beamform: angle count does not match cube");
  }
  if (profile.num_scanlines() != cfg.num_scanlines ||
      profile.num_planewaves() != nk) {
    throw BeamformError("beamform: aberration profile must be L x K");
  }
  const PixelGrid grid = pixel_grid(cfg, probe);
  const detail::ReceiveTables rx(probe, apod, grid.depths);
  const std::size_t na = grid.depths.size();
  const std::size_t nl = grid.laterals.size();

  DasTensor out{Tensor3<double>(na, nl, nk), cfg, angles};
  std::vector<double> column(nl);
  for (std::size_t k = 0; k < nk; ++k) {
    for (std::size_t l = 0; l < nl; ++l) {
      column[l] = profile.sos(l, k);
    }
    const Matrix<double> slab =
        detail::das_slab(cube, k, angles.angles[k], column, rx, grid);
    for (std::size_t a = 0; a < na; ++a) {
      for (std::size_t l = 0; l < nl; ++l) {
        out.z(a, l, k) = slab(a, l);
      }
    }
  }
  return out;
}

} // namespace pwbf
