#pragma once

#include "pwbf/postproc.hpp"
#include "pwbf/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace pwbf {

struct MetricsError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Region of interest in grid coordinates: `l` is the scanline (column)
// index, `a` the depth (row) index. A circle may have different radii along
// the two axes since grid cells are not square.
struct RoiSpec {
  enum class Kind { Circle, Rect };
  Kind kind{Kind::Circle};
  // circle
  double center_l{};
  double center_a{};
  double radius_l{};
  double radius_a{};
  // rect, inclusive bounds
  std::size_t l0{}, a0{}, l1{}, a1{};

  static RoiSpec circle(double cl, double ca, double r) {
    return circle(cl, ca, r, r);
  }
  static RoiSpec circle(double cl, double ca, double rl, double ra) {
    RoiSpec s;
    s.kind = Kind::Circle;
    s.center_l = cl;
    s.center_a = ca;
    s.radius_l = rl;
    s.radius_a = ra;
    return s;
  }
  static RoiSpec rect(std::size_t l0, std::size_t a0, std::size_t l1,
                      std::size_t a1) {
    RoiSpec s;
    s.kind = Kind::Rect;
    s.l0 = std::min(l0, l1);
    s.l1 = std::max(l0, l1);
    s.a0 = std::min(a0, a1);
    s.a1 = std::max(a0, a1);
    return s;
  }

  [[nodiscard]] bool contains(std::size_t a, std::size_t l) const {
    if (kind == Kind::Rect) {
      return l >= l0 && l <= l1 && a >= a0 && a <= a1;
    }
    if (radius_l <= 0.0 || radius_a <= 0.0) {
      return false;
    }
    const double dl = (static_cast<double>(l) - center_l) / radius_l;
    const double da = (static_cast<double>(a) - center_a) / radius_a;
    return dl * dl + da * da <= 1.0;
  }
};

inline constexpr std::size_t kMinRoiPixels = 16;

// Pixel values of img inside roi, in row-major scan order.
inline std::vector<double> roi_values(const Matrix<double> &img,
                                      const RoiSpec &roi) {
  std::vector<double> v;
  for (std::size_t a = 0; a < img.rows(); ++a) {
    for (std::size_t l = 0; l < img.cols(); ++l) {
      if (roi.contains(a, l)) {
        v.push_back(img(a, l));
      }
    }
  }
  return v;
}

namespace detail {

struct RoiPair {
  std::vector<double> a;
  std::vector<double> b;
};

inline RoiPair roi_pair(const Matrix<double> &img, const RoiSpec &ra,
                        const RoiSpec &rb) {
  RoiPair p;
  for (std::size_t a = 0; a < img.rows(); ++a) {
    for (std::size_t l = 0; l < img.cols(); ++l) {
      const bool in_a = ra.contains(a, l);
      const bool in_b = rb.contains(a, l);
      if (in_a && in_b) {
        throw MetricsError("metrics: regions overlap");
      }
      if (in_a) {
        p.a.push_back(img(a, l));
      } else if (in_b) {
        p.b.push_back(img(a, l));
      }
    }
  }
  if (p.a.empty() || p.b.empty()) {
    throw MetricsError("metrics: empty region");
  }
  return p;
}

struct Moments {
  double mean{};
  double var{}; // population
};

inline Moments moments(const std::vector<double> &v) {
  double sum = 0.0;
  for (double x : v) {
    sum += x;
  }
  const double mean = sum / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) {
    ss += (x - mean) * (x - mean);
  }
  return {mean, ss / static_cast<double>(v.size())};
}

} // namespace detail

inline double cr(const Matrix<double> &img, const RoiSpec &ra,
                 const RoiSpec &rb) {
  const auto p = detail::roi_pair(img, ra, rb);
  return std::abs(detail::moments(p.a).mean - detail::moments(p.b).mean);
}

inline double cnr(const Matrix<double> &img, const RoiSpec &ra,
                  const RoiSpec &rb) {
  const auto p = detail::roi_pair(img, ra, rb);
  const auto ma = detail::moments(p.a);
  const auto mb = detail::moments(p.b);
  const double denom = std::sqrt(ma.var + mb.var);
  if (denom == 0.0) {
    throw MetricsError("cnr: both regions have zero variance");
  }
  return std::abs(ma.mean - mb.mean) / denom;
}

// Generalized CNR from two probability-mass histograms on shared edges that
// span the combined value range of both samples.
inline double gcnr_values(const std::vector<double> &va,
                          const std::vector<double> &vb,
                          std::size_t bins = 256) {
  if (bins < 2) {
    throw MetricsError("gcnr: need at least 2 bins");
  }
  if (va.empty() || vb.empty()) {
    throw MetricsError("gcnr: empty region");
  }
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto *v : {&va, &vb}) {
    for (double x : *v) {
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    }
  }
  if (lo == hi) {
    return 0.0; // both regions are the same constant
  }
  const double width = (hi - lo) / static_cast<double>(bins);
  auto histogram = [&](const std::vector<double> &v) {
    std::vector<double> h(bins, 0.0);
    for (double x : v) {
      auto b = static_cast<std::size_t>((x - lo) / width);
      h[std::min(b, bins - 1)] += 1.0;
    }
    for (double &c : h) {
      c /= static_cast<double>(v.size());
    }
    return h;
  };
  const auto ha = histogram(va);
  const auto hb = histogram(vb);
  double overlap = 0.0;
  for (std::size_t b = 0; b < bins; ++b) {
    overlap += std::min(ha[b], hb[b]);
  }
  return std::clamp(1.0 - overlap, 0.0, 1.0);
}

inline double gcnr(const Matrix<double> &img, const RoiSpec &ra,
                   const RoiSpec &rb, std::size_t bins = 256) {
  const auto p = detail::roi_pair(img, ra, rb);
  return gcnr_values(p.a, p.b, bins);
}

struct MetricsReport {
  double cr_db{};
  double cnr{};
  double gcnr{};
  std::size_t pixels_a{};
  std::size_t pixels_b{};
};

inline MetricsReport evaluate(const Matrix<double> &img, const RoiSpec &ra,
                              const RoiSpec &rb, std::size_t bins = 256) {
  const auto p = detail::roi_pair(img, ra, rb);
  if (p.a.size() < kMinRoiPixels || p.b.size() < kMinRoiPixels) {
    throw MetricsError("metrics: each region needs at least 16 pixels");
  }
  const auto ma = detail::moments(p.a);
  const auto mb = detail::moments(p.b);
  MetricsReport r;
  r.cr_db = std::abs(ma.mean - mb.mean);
  const double denom = std::sqrt(ma.var + mb.var);
  if (denom == 0.0) {
    throw MetricsError("cnr: both regions have zero variance");
  }
  r.cnr = r.cr_db / denom;
  r.gcnr = gcnr_values(p.a, p.b, bins);
  r.pixels_a = p.a.size();
  r.pixels_b = p.b.size();
  return r;
}

inline MetricsReport evaluate(const BmodeImage &img, const RoiSpec &ra,
                              const RoiSpec &rb, std::size_t bins = 256) {
  return evaluate(img.db, ra, rb, bins);
}

// "circle:cl,ca,r", "circle:cl,ca,rl,ra" or "rect:l0,a0,l1,a1".
inline RoiSpec parse_roi(const std::string &text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) {
    throw MetricsError("roi: expected kind:values, got " + text);
  }
  const std::string kind = text.substr(0, colon);
  std::vector<double> vals;
  std::size_t pos = colon + 1;
  while (pos <= text.size()) {
    const auto comma = text.find(',', pos);
    const std::string tok =
        text.substr(pos, comma == std::string::npos ? std::string::npos
                                                    : comma - pos);
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(tok, &used);
    } catch (const std::exception &) {
      used = 0;
    }
    if (used == 0 || used != tok.size()) {
      throw MetricsError("roi: bad number '" + tok + "' in " + text);
    }
    vals.push_back(v);
    if (comma == std::string::npos) {
      break;
    }
    pos = comma + 1;
  }
  if (kind == "circle" && vals.size() == 3) {
    return RoiSpec::circle(vals[0], vals[1], vals[2]);
  }
  if (kind == "circle" && vals.size() == 4) {
    return RoiSpec::circle(vals[0], vals[1], vals[2], vals[3]);
  }
  if (kind == "rect" && vals.size() == 4) {
    for (double v : vals) {
      if (v < 0 || v != std::floor(v)) {
        throw MetricsError("roi: rect bounds must be non-negative integers");
      }
    }
    return RoiSpec::rect(static_cast<std::size_t>(vals[0]),
                         static_cast<std::size_t>(vals[1]),
                         static_cast<std::size_t>(vals[2]),
                         static_cast<std::size_t>(vals[3]));
  }
  throw MetricsError("roi: unsupported spec " + text);
}

} // namespace pwbf
