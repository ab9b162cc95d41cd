#pragma once

#include <cmath>
#include <cstddef>
#include <fstream>
#include <map>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace pwbf {

struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Linear array transducer. Defaults are the L3-12H setup: 192 elements,
// 0.2 mm pitch, 0.14 mm element width, 8.48 MHz carrier, 40 MHz sampling,
// 31 plane waves.
struct ProbeConfig {
  std::size_t num_elements{192};
  double pitch{0.2e-3};          // [m]
  double element_width{0.14e-3}; // [m]
  double center_frequency{8.48e6}; // [Hz]
  double sampling_frequency{40.0e6}; // [Hz]
  std::size_t num_planewaves{31};

  [[nodiscard]] double element_x(std::size_t i) const {
    return (static_cast<double>(i) -
            0.5 * static_cast<double>(num_elements - 1)) *
           pitch;
  }
  // Distance between the outermost element centers.
  [[nodiscard]] double lateral_extent() const {
    return static_cast<double>(num_elements - 1) * pitch;
  }
  [[nodiscard]] double wavelength(double sos) const {
    return sos / center_frequency;
  }

  void validate() const {
    if (num_elements < 2) {
      throw ConfigError("probe: num_elements must be >= 2");
    }
    if (!(element_width > 0.0) || !(pitch > element_width)) {
      throw ConfigError("probe: require pitch > element_width > 0");
    }
    if (!(center_frequency > 0.0) ||
        !(center_frequency < 0.5 * sampling_frequency)) {
      throw ConfigError(
          "probe: require 0 < center_frequency < sampling_frequency/2");
    }
    if (num_planewaves % 2 == 0) {
      throw ConfigError("probe: num_planewaves must be odd");
    }
  }
};

inline ProbeConfig default_probe() { return ProbeConfig{}; }

// Same transducer with a 96-element sub-aperture. Used for scenes that have
// to be simulated many times (seed sweeps); the full 192-element scene is
// about twice the simulation and beamforming cost.
inline ProbeConfig desk_probe() {
  ProbeConfig p;
  p.num_elements = 96;
  return p;
}

struct AngleSet {
  std::vector<double> angles; // [rad], strictly increasing

  [[nodiscard]] std::size_t size() const { return angles.size(); }
};

namespace detail {

inline void require_odd(std::size_t n, const char *what) {
  if (n == 0 || n % 2 == 0) {
    throw ConfigError(std::string(what) + " must be a positive odd count");
  }
}

} // namespace detail

// Indices of a symmetric uniform decimation of 0..full-1 down to `subset`
// entries. Always keeps both extremes and the center index. Only the lower
// half is rounded; the upper half is mirrored so ties cannot break symmetry.
inline std::vector<std::size_t> decimation_indices(std::size_t full,
                                                   std::size_t subset) {
  detail::require_odd(full, "K_full");
  detail::require_odd(subset, "subset_K");
  if (subset > full) {
    throw ConfigError("subset_K must not exceed K_full");
  }
  std::vector<std::size_t> idx(subset);
  if (subset == 1) {
    idx[0] = (full - 1) / 2;
    return idx;
  }
  const double step =
      static_cast<double>(full - 1) / static_cast<double>(subset - 1);
  const std::size_t half = (subset - 1) / 2;
  for (std::size_t i = 0; i <= half; ++i) {
    idx[i] = static_cast<std::size_t>(std::round(static_cast<double>(i) * step));
    idx[subset - 1 - i] = full - 1 - idx[i];
  }
  return idx;
}

inline AngleSet make_angle_set(std::size_t k_full, double span_deg,
                               std::size_t subset_k) {
  if (!(span_deg > 0.0) || !(span_deg < 45.0)) {
    throw ConfigError("angle span must be in (0, 45) degrees");
  }
  const auto idx = decimation_indices(k_full, subset_k);
  const double span = span_deg * std::numbers::pi / 180.0;
  const std::size_t half = (k_full - 1) / 2;
  AngleSet set;
  set.angles.reserve(idx.size());
  for (std::size_t i : idx) {
    // Built from the signed offset so that the list is exactly antisymmetric.
    const double offset = static_cast<double>(i) - static_cast<double>(half);
    set.angles.push_back(half == 0 ? 0.0
                                   : span * offset / static_cast<double>(half));
  }
  return set;
}

// Receive apodization of the delay-and-sum beamformer.
struct ApodizationSpec {
  enum class Window { Rectangular, Hann };
  Window window{Window::Hann};
  double f_number{1.0};

  void validate() const {
    if (!(f_number > 0.5) || !(f_number <= 4.0)) {
      throw ConfigError("apodization: f_number must be in (0.5, 4]");
    }
  }
};

struct ImagingConfig {
  double depth_start{20.0e-3}; // [m]
  double depth_end{80.0e-3};   // [m]
  std::size_t num_depth_samples{2400};
  std::size_t num_scanlines{192};
  double assumed_sos{1540.0}; // [m/s]
  double dynamic_range{60.0}; // [dB]

  void validate(const ProbeConfig &probe) const {
    if (!(depth_start >= 0.0) || !(depth_end > depth_start)) {
      throw ConfigError("imaging: require 0 <= depth_start < depth_end");
    }
    if (num_depth_samples < 1) {
      throw ConfigError("imaging: num_depth_samples must be >= 1");
    }
    if (num_scanlines != probe.num_elements) {
      throw ConfigError("imaging: num_scanlines must equal num_elements");
    }
    if (!(assumed_sos >= 1000.0 && assumed_sos <= 2000.0)) {
      throw ConfigError("imaging: assumed_sos must be in [1000, 2000] m/s");
    }
    if (!(dynamic_range > 0.0)) {
      throw ConfigError("imaging: dynamic_range must be > 0");
    }
  }
};

// Depth window [z0, z1] split into round((z1 - z0) / spacing) intervals,
// scanlines at the element centers of `probe`.
inline ImagingConfig imaging_window(const ProbeConfig &probe, double z0,
                                    double z1, double spacing = 25.0e-6) {
  ImagingConfig cfg;
  cfg.depth_start = z0;
  cfg.depth_end = z1;
  cfg.num_depth_samples =
      static_cast<std::size_t>(std::llround((z1 - z0) / spacing));
  cfg.num_scanlines = probe.num_elements;
  return cfg;
}

inline ImagingConfig default_imaging(const ProbeConfig &probe) {
  return imaging_window(probe, 20.0e-3, 80.0e-3);
}

struct PixelGrid {
  std::vector<double> depths;   // length A
  std::vector<double> laterals; // length L
};

inline PixelGrid pixel_grid(const ImagingConfig &cfg,
                            const ProbeConfig &probe) {
  PixelGrid g;
  const std::size_t a_count = cfg.num_depth_samples;
  g.depths.resize(a_count);
  if (a_count == 1) {
    g.depths[0] = cfg.depth_start;
  } else {
    const double span = cfg.depth_end - cfg.depth_start;
    for (std::size_t a = 0; a < a_count; ++a) {
      g.depths[a] = cfg.depth_start + span * static_cast<double>(a) /
                                          static_cast<double>(a_count - 1);
    }
  }
  g.laterals.resize(probe.num_elements);
  for (std::size_t l = 0; l < probe.num_elements; ++l) {
    g.laterals[l] = probe.element_x(l);
  }
  return g;
}

// Everything a pipeline run needs, as read from a config file.
struct RunConfig {
  ProbeConfig probe{};
  ImagingConfig imaging{imaging_window(ProbeConfig{}, 15.0e-3, 25.0e-3)};
  double angle_span_deg{15.0};
  ApodizationSpec apodization{};
  double fractional_bandwidth{0.6};

  [[nodiscard]] AngleSet angles(std::size_t subset_k) const {
    return make_angle_set(probe.num_planewaves, angle_span_deg, subset_k);
  }
  [[nodiscard]] AngleSet angles() const {
    return angles(probe.num_planewaves);
  }

  void validate() const {
    probe.validate();
    imaging.validate(probe);
    apodization.validate();
    (void)angles();
    if (!(fractional_bandwidth > 0.0 && fractional_bandwidth < 2.0)) {
      throw ConfigError("fractional_bandwidth must be in (0, 2)");
    }
  }
};

namespace detail {

inline std::string trim(const std::string &s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) {
    return {};
  }
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string &key, const std::string &v) {
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &used);
  } catch (const std::exception &) {
    used = 0;
  }
  if (used != v.size() || v.empty()) {
    throw ConfigError("config: bad number for '" + key + "': " + v);
  }
  return out;
}

inline std::size_t parse_count(const std::string &key, const std::string &v) {
  const double d = parse_double(key, v);
  if (d < 0 || d != std::floor(d)) {
    throw ConfigError("config: '" + key + "' must be a non-negative integer");
  }
  return static_cast<std::size_t>(d);
}

} // namespace detail

// Flat key=value text, one key per line, SI units. Blank lines and lines
// starting with '#' are skipped. Unknown or repeated keys are errors.
inline RunConfig parse_config(std::istream &in) {
  RunConfig cfg;
  std::map<std::string, std::string> kv;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = detail::trim(line);
    if (t.empty() || t.front() == '#') {
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config: line " + std::to_string(lineno) +
                        ": expected key=value");
    }
    const std::string key = detail::trim(t.substr(0, eq));
    const std::string value = detail::trim(t.substr(eq + 1));
    if (!kv.emplace(key, value).second) {
      throw ConfigError("config: duplicate key '" + key + "'");
    }
  }

  bool scanlines_given = false;
  for (const auto &[key, v] : kv) {
    using detail::parse_count;
    using detail::parse_double;
    if (key == "num_elements") {
      cfg.probe.num_elements = parse_count(key, v);
    } else if (key == "pitch") {
      cfg.probe.pitch = parse_double(key, v);
    } else if (key == "element_width") {
      cfg.probe.element_width = parse_double(key, v);
    } else if (key == "center_frequency") {
      cfg.probe.center_frequency = parse_double(key, v);
    } else if (key == "sampling_frequency") {
      cfg.probe.sampling_frequency = parse_double(key, v);
    } else if (key == "num_planewaves") {
      cfg.probe.num_planewaves = parse_count(key, v);
    } else if (key == "depth_start") {
      cfg.imaging.depth_start = parse_double(key, v);
    } else if (key == "depth_end") {
      cfg.imaging.depth_end = parse_double(key, v);
    } else if (key == "num_depth_samples") {
      cfg.imaging.num_depth_samples = parse_count(key, v);
    } else if (key == "num_scanlines") {
      cfg.imaging.num_scanlines = parse_count(key, v);
      scanlines_given = true;
    } else if (key == "assumed_sos") {
      cfg.imaging.assumed_sos = parse_double(key, v);
    } else if (key == "dynamic_range") {
      cfg.imaging.dynamic_range = parse_double(key, v);
    } else if (key == "angle_span_deg") {
      cfg.angle_span_deg = parse_double(key, v);
    } else if (key == "window") {
      if (v == "hann") {
        cfg.apodization.window = ApodizationSpec::Window::Hann;
      } else if (v == "rectangular") {
        cfg.apodization.window = ApodizationSpec::Window::Rectangular;
      } else {
        throw ConfigError("config: window must be hann or rectangular");
      }
    } else if (key == "f_number") {
      cfg.apodization.f_number = parse_double(key, v);
    } else if (key == "fractional_bandwidth") {
      cfg.fractional_bandwidth = parse_double(key, v);
    } else {
      throw ConfigError("config: unknown key '" + key + "'");
    }
  }
  if (!scanlines_given) {
    cfg.imaging.num_scanlines = cfg.probe.num_elements;
  }
  cfg.validate();
  return cfg;
}

inline RunConfig load_config(const std::string &path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open config file: " + path);
  }
  return parse_config(in);
}

} // namespace pwbf
