#pragma once

#include "pwbf/compound.hpp"
#include "pwbf/parallel.hpp"
#include "pwbf/tensor.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <complex>
#include <span>
#include <stdexcept>
#include <vector>

namespace pwbf {

struct IqImage {
  Matrix<cplx> iq;
};

// Log-compressed image in [-dynamic_range, 0] dB.
struct BmodeImage {
  Matrix<double> db;
  double dynamic_range{60.0};
};

// Discrete analytic signal of a real sequence, computed at the exact input
// length: zero the negative-frequency bins, double the positive ones, keep DC
// and (for even lengths) Nyquist.
inline std::vector<cplx> analytic_signal(std::span<const double> x) {
  const std::size_t n = x.size();
  if (n < 2) {
    throw std::invalid_argument("analytic_signal: need at least 2 samples");
  }
  std::vector<cplx> in(x.begin(), x.end());
  std::vector<cplx> spec;
  Eigen::FFT<double> fft;
  fft.fwd(spec, in);
  const std::size_t positive_end = (n + 1) / 2; // exclusive
  for (std::size_t f = 1; f < positive_end; ++f) {
    spec[f] *= 2.0;
  }
  for (std::size_t f = n / 2 + 1; f < n; ++f) {
    spec[f] = 0.0;
  }
  std::vector<cplx> out;
  fft.inv(out, spec);
  return out;
}

// Analytic signal of every column (scanline), along depth.
inline IqImage iq_image(const Matrix<double> &rf) {
  const std::size_t na = rf.rows();
  const std::size_t nl = rf.cols();
  IqImage out{Matrix<cplx>(na, nl)};
  parallel_for(nl, [&](std::size_t l) {
    std::vector<double> col(na);
    for (std::size_t a = 0; a < na; ++a) {
      col[a] = rf(a, l);
    }
    const auto z = analytic_signal(col);
    for (std::size_t a = 0; a < na; ++a) {
      out.iq(a, l) = z[a];
    }
  });
  return out;
}

inline Matrix<double> magnitude(const Matrix<cplx> &m) {
  Matrix<double> out(m.rows(), m.cols());
  std::transform(m.flat().begin(), m.flat().end(), out.flat().begin(),
                 [](const cplx &v) { return std::abs(v); });
  return out;
}

inline Matrix<double> envelope(const Matrix<double> &rf) {
  return magnitude(iq_image(rf).iq);
}

inline Matrix<double> envelope(const CompoundImage &img) {
  return envelope(img.v);
}

inline BmodeImage log_compress(const Matrix<double> &env,
                               double dynamic_range) {
  if (!(dynamic_range > 0.0)) {
    throw std::invalid_argument("log_compress: dynamic range must be > 0");
  }
  if (env.empty()) {
    throw std::invalid_argument("log_compress: empty envelope");
  }
  double peak = 0.0;
  for (double v : env.flat()) {
    if (v < 0.0 || !std::isfinite(v)) {
      throw std::invalid_argument("log_compress: envelope must be finite, >= 0");
    }
    peak = std::max(peak, v);
  }
  if (peak == 0.0) {
    throw std::invalid_argument("log_compress: all-zero envelope");
  }
  BmodeImage out{Matrix<double>(env.rows(), env.cols()), dynamic_range};
  std::transform(env.flat().begin(), env.flat().end(), out.db.flat().begin(),
                 [&](double v) {
                   if (v == 0.0) {
                     return -dynamic_range;
                   }
                   const double db = 20.0 * std::log10(v / peak);
                   return std::clamp(db, -dynamic_range, 0.0);
                 });
  return out;
}

inline BmodeImage bmode(const CompoundImage &img, double dynamic_range) {
  return log_compress(envelope(img), dynamic_range);
}

} // namespace pwbf
