#pragma once

#include "pwbf/beamform.hpp"
#include "pwbf/compound.hpp"
#include "pwbf/parallel.hpp"
#include "pwbf/postproc.hpp"
#include "pwbf/tensor.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

namespace pwbf {

// Analytic signal of every (scanline, plane wave) depth column of a DasTensor.
struct IqTensor {
  Tensor3<cplx> zt; // A x L x K
};

inline IqTensor iq_tensor(const DasTensor &t) {
  const std::size_t na = t.depth();
  const std::size_t nl = t.lines();
  const std::size_t nk = t.planewaves();
  IqTensor out{Tensor3<cplx>(na, nl, nk)};
  parallel_for(nl * nk, [&](std::size_t p) {
    const std::size_t l = p / nk;
    const std::size_t k = p % nk;
    std::vector<double> col(na);
    for (std::size_t a = 0; a < na; ++a) {
      col[a] = t.z(a, l, k);
    }
    const auto z = analytic_signal(col);
    for (std::size_t a = 0; a < na; ++a) {
      out.zt(a, l, k) = z[a];
    }
  });
  return out;
}

struct RoiPatch {
  std::size_t a0{};
  std::size_t l0{};
  Tensor3<cplx> data; // A_r x L_r x K

  [[nodiscard]] std::size_t rows() const { return data.dim(0); }
  [[nodiscard]] std::size_t cols() const { return data.dim(1); }
  [[nodiscard]] std::size_t planewaves() const { return data.dim(2); }
};

inline RoiPatch extract_patch(const IqTensor &t, std::size_t a0,
                              std::size_t l0, std::size_t rows,
                              std::size_t cols) {
  const auto [na, nl, nk] = t.zt.dims();
  if (a0 + rows > na || l0 + cols > nl || rows == 0 || cols == 0) {
    throw std::out_of_range("extract_patch: patch outside the image");
  }
  RoiPatch p{a0, l0, Tensor3<cplx>(rows, cols, nk)};
  for (std::size_t a = 0; a < rows; ++a) {
    for (std::size_t l = 0; l < cols; ++l) {
      for (std::size_t k = 0; k < nk; ++k) {
        p.data(a, l, k) = t.zt(a0 + a, l0 + l, k);
      }
    }
  }
  return p;
}

// (A_r * L_r) x K matrix; column k is slab k flattened column-major
// (axial index fastest).
inline Eigen::MatrixXcd casorati(const RoiPatch &patch) {
  const std::size_t rows = patch.rows();
  const std::size_t cols = patch.cols();
  const std::size_t nk = patch.planewaves();
  Eigen::MatrixXcd c(static_cast<Eigen::Index>(rows * cols),
                     static_cast<Eigen::Index>(nk));
  for (std::size_t k = 0; k < nk; ++k) {
    for (std::size_t l = 0; l < cols; ++l) {
      for (std::size_t a = 0; a < rows; ++a) {
        c(static_cast<Eigen::Index>(a + rows * l),
          static_cast<Eigen::Index>(k)) = patch.data(a, l, k);
      }
    }
  }
  return c;
}

// Inverse of casorati for a patch of the given spatial shape.
inline Tensor3<cplx> uncasorati(const Eigen::MatrixXcd &c, std::size_t rows,
                                std::size_t cols) {
  if (static_cast<std::size_t>(c.rows()) != rows * cols) {
    throw std::invalid_argument("uncasorati: row count is not rows * cols");
  }
  const auto nk = static_cast<std::size_t>(c.cols());
  Tensor3<cplx> out(rows, cols, nk);
  for (std::size_t k = 0; k < nk; ++k) {
    for (std::size_t l = 0; l < cols; ++l) {
      for (std::size_t a = 0; a < rows; ++a) {
        out(a, l, k) = c(static_cast<Eigen::Index>(a + rows * l),
                         static_cast<Eigen::Index>(k));
      }
    }
  }
  return out;
}

struct Rank1Result {
  Matrix<cplx> image;  // A_r x L_r
  double singular_value{};
  bool fallback{};     // SVD failed; image is the plain mean over plane waves
};

// Dominant spatial singular vector scaled by its singular value. The global
// phase is fixed so that the result has a real, non-negative inner product
// with the plain coherent mean; when that mean is (numerically) orthogonal,
// the plane-wave column with the largest projection is used instead.
inline Rank1Result rank1_compound(const RoiPatch &patch) {
  const std::size_t rows = patch.rows();
  const std::size_t cols = patch.cols();
  const std::size_t nk = patch.planewaves();
  if (nk < 2) {
    throw std::invalid_argument("rank1_compound: need at least 2 plane waves");
  }
  const Eigen::MatrixXcd c = casorati(patch);
  const Eigen::VectorXcd mean = c.rowwise().mean();

  auto reshape = [&](const Eigen::VectorXcd &v) {
    Matrix<cplx> img(rows, cols);
    for (std::size_t l = 0; l < cols; ++l) {
      for (std::size_t a = 0; a < rows; ++a) {
        img(a, l) = v(static_cast<Eigen::Index>(a + rows * l));
      }
    }
    return img;
  };

  const Eigen::JacobiSVD<Eigen::MatrixXcd> svd(c, Eigen::ComputeThinU);
  const bool ok = svd.info() == Eigen::Success &&
                  svd.singularValues().allFinite() &&
                  svd.matrixU().allFinite();
  if (!ok) {
    return {reshape(mean), 0.0, true};
  }
  const double s1 = svd.singularValues()(0);
  if (s1 == 0.0) {
    return {Matrix<cplx>(rows, cols), 0.0, false};
  }
  Eigen::VectorXcd u1 = svd.matrixU().col(0);

  cplx ref = u1.dot(mean); // u1^H mean
  if (std::abs(ref) <= 1e-12 * s1 / std::sqrt(static_cast<double>(nk))) {
    double best = -1.0;
    for (Eigen::Index k = 0; k < c.cols(); ++k) {
      const cplx p = u1.dot(c.col(k));
      if (std::abs(p) > best) {
        best = std::abs(p);
        ref = p;
      }
    }
  }
  if (std::abs(ref) > 0.0) {
    u1 *= ref / std::abs(ref);
  }
  return {reshape(u1 * s1), s1, false};
}

struct SvdBeamformResult {
  CompoundImage image;       // real part of the assembled rank-1 image
  Matrix<cplx> iq;           // assembled complex image
  Matrix<double> envelope;   // |iq|, the B-mode input for this beamformer
  std::size_t patches{};
  std::size_t fallbacks{};
};

inline SvdBeamformResult svd_beamform(const DasTensor &t,
                                      std::size_t patch_rows,
                                      std::size_t patch_cols) {
  const std::size_t na = t.depth();
  const std::size_t nl = t.lines();
  if (patch_rows == 0 || patch_cols == 0) {
    throw std::invalid_argument("svd_beamform: empty patch shape");
  }
  if (patch_rows > na || patch_cols > nl) {
    throw std::invalid_argument("svd_beamform: patch larger than the image");
  }
  const IqTensor iq = iq_tensor(t);

  struct Tile {
    std::size_t a0, l0, rows, cols;
  };
  std::vector<Tile> tiles;
  for (std::size_t a0 = 0; a0 < na; a0 += patch_rows) {
    for (std::size_t l0 = 0; l0 < nl; l0 += patch_cols) {
      tiles.push_back({a0, l0, std::min(patch_rows, na - a0),
                       std::min(patch_cols, nl - l0)});
    }
  }

  SvdBeamformResult out{CompoundImage{Matrix<double>(na, nl), t.imaging},
                        Matrix<cplx>(na, nl), Matrix<double>(na, nl),
                        tiles.size(), 0};
  std::vector<char> fell_back(tiles.size(), 0);
  parallel_for(tiles.size(), [&](std::size_t i) {
    const Tile &tile = tiles[i];
    const RoiPatch patch =
        extract_patch(iq, tile.a0, tile.l0, tile.rows, tile.cols);
    const Rank1Result r = rank1_compound(patch);
    fell_back[i] = r.fallback ? 1 : 0;
    for (std::size_t a = 0; a < tile.rows; ++a) {
      for (std::size_t l = 0; l < tile.cols; ++l) {
        out.iq(tile.a0 + a, tile.l0 + l) = r.image(a, l);
      }
    }
  });
  for (char f : fell_back) {
    out.fallbacks += static_cast<std::size_t>(f);
  }
  for (std::size_t a = 0; a < na; ++a) {
    for (std::size_t l = 0; l < nl; ++l) {
      out.image.v(a, l) = out.iq(a, l).real();
      out.envelope(a, l) = std::abs(out.iq(a, l));
    }
  }
  return out;
}

} // namespace pwbf
