#pragma once

#include "pwbf/config.hpp"
#include "pwbf/metrics.hpp"
#include "pwbf/rfsim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <utility>

namespace pwbf {

// Phantom region matched to the probe aperture and imaging window: speckle
// 1 mm beyond the window on both ends, inclusion at the window center.
inline PhantomSpec scene_spec(const RunConfig &cfg) {
  PhantomSpec spec = phantom_spec_for(cfg.probe);
  spec.true_sos = cfg.imaging.assumed_sos;
  spec.wavelength = cfg.probe.wavelength(spec.true_sos);
  spec.depth_min = std::max(0.0, cfg.imaging.depth_start - 1.0e-3);
  spec.depth_max = cfg.imaging.depth_end + 1.0e-3;
  spec.cyst_z = 0.5 * (cfg.imaging.depth_start + cfg.imaging.depth_end);
  return spec;
}

inline Phantom scene_phantom(const RunConfig &cfg, PhantomKind kind,
                             std::uint64_t seed) {
  return make_cyst_phantom(kind, seed, scene_spec(cfg));
}

inline RfCube simulate_scene(const RunConfig &cfg, const Phantom &phantom) {
  const AngleSet angles = cfg.angles();
  double deepest = cfg.imaging.depth_end;
  for (const auto &s : phantom.scatterers) {
    deepest = std::max(deepest, s.z);
  }
  const double duration =
      required_duration(cfg.probe, angles, deepest, phantom.true_sos,
                        cfg.fractional_bandwidth);
  return simulate(phantom, cfg.probe, angles, duration,
                  cfg.fractional_bandwidth);
}

// Regions for scoring a circular inclusion: inside the inclusion (80% of
// its radius) and a background box beside it at the same depths.
inline std::pair<RoiSpec, RoiSpec> cyst_rois(const RunConfig &cfg,
                                             const PhantomSpec &spec) {
  const ImagingConfig &im = cfg.imaging;
  const double dz = (im.depth_end - im.depth_start) /
                    static_cast<double>(std::max<std::size_t>(
                        1, im.num_depth_samples - 1));
  const double pitch = cfg.probe.pitch;
  const double x0 = cfg.probe.element_x(0);
  const double r = 0.8 * spec.cyst_radius;

  const double cl = (spec.cyst_x - x0) / pitch;
  const double ca = (spec.cyst_z - im.depth_start) / dz;
  const RoiSpec inside = RoiSpec::circle(cl, ca, r / pitch, r / dz);

  const double last_l = static_cast<double>(cfg.probe.num_elements - 1);
  const double last_a = static_cast<double>(im.num_depth_samples - 1);
  auto clamp_l = [&](double v) {
    return static_cast<std::size_t>(std::clamp(std::round(v), 0.0, last_l));
  };
  auto clamp_a = [&](double v) {
    return static_cast<std::size_t>(std::clamp(std::round(v), 0.0, last_a));
  };
  const RoiSpec background = RoiSpec::rect(
      clamp_l((spec.cyst_x + 1.5 * spec.cyst_radius - x0) / pitch),
      clamp_a(ca - r / dz),
      clamp_l((spec.cyst_x + 3.5 * spec.cyst_radius - x0) / pitch),
      clamp_a(ca + r / dz));
  return {inside, background};
}

// Desk-scale cyst scene: 96-element sub-aperture, 15-25 mm window.
inline RunConfig desk_scene_config() {
  RunConfig cfg;
  cfg.probe = desk_probe();
  cfg.imaging = imaging_window(cfg.probe, 15.0e-3, 25.0e-3);
  return cfg;
}

} // namespace pwbf
