#include "oracles.hpp"

#include "pwbf/svdbf.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace pwbf;

namespace {

RoiPatch random_patch(std::size_t rows, std::size_t cols, std::size_t k,
                      std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> dist;
  RoiPatch p{0, 0, Tensor3<cplx>(rows, cols, k)};
  for (auto &v : p.data.storage()) {
    v = cplx(dist(gen), dist(gen));
  }
  return p;
}

// Patch whose slabs are coef[k] * S for a fixed random S.
RoiPatch scaled_copies(std::size_t rows, std::size_t cols,
                       const std::vector<cplx> &coef, Matrix<cplx> *s_out) {
  const RoiPatch s = random_patch(rows, cols, 1, 42);
  RoiPatch p{0, 0, Tensor3<cplx>(rows, cols, coef.size())};
  Matrix<cplx> s_img(rows, cols);
  for (std::size_t a = 0; a < rows; ++a) {
    for (std::size_t l = 0; l < cols; ++l) {
      s_img(a, l) = s.data(a, l, 0);
      for (std::size_t k = 0; k < coef.size(); ++k) {
        p.data(a, l, k) = coef[k] * s.data(a, l, 0);
      }
    }
  }
  if (s_out != nullptr) {
    *s_out = s_img;
  }
  return p;
}

double correlation(const Matrix<cplx> &x, const Matrix<cplx> &y) {
  cplx xy = 0.0;
  double xx = 0.0;
  double yy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    xy += std::conj(x.flat()[i]) * y.flat()[i];
    xx += std::norm(x.flat()[i]);
    yy += std::norm(y.flat()[i]);
  }
  return std::abs(xy) / std::sqrt(xx * yy);
}

} // namespace

TEST(Casorati, ColumnMajorFlattening) {
  RoiPatch p{0, 0, Tensor3<cplx>(2, 2, 1)};
  p.data(0, 0, 0) = 1.0;
  p.data(0, 1, 0) = 2.0;
  p.data(1, 0, 0) = 3.0;
  p.data(1, 1, 0) = 4.0;
  const Eigen::MatrixXcd c = casorati(p);
  ASSERT_EQ(c.rows(), 4);
  ASSERT_EQ(c.cols(), 1);
  EXPECT_EQ(c(0, 0), cplx(1.0));
  EXPECT_EQ(c(1, 0), cplx(3.0));
  EXPECT_EQ(c(2, 0), cplx(2.0));
  EXPECT_EQ(c(3, 0), cplx(4.0));
}

TEST(Casorati, RoundTripIsBitwise) {
  const RoiPatch p = random_patch(32, 32, 15, 1);
  EXPECT_EQ(uncasorati(casorati(p), 32, 32), p.data);
  const RoiPatch q = random_patch(5, 3, 2, 2);
  EXPECT_EQ(uncasorati(casorati(q), 5, 3), q.data);
  EXPECT_THROW(uncasorati(casorati(q), 3, 3), std::invalid_argument);
}

TEST(Rank1, IdenticalSlabsReproduceSlab) {
  Matrix<cplx> s;
  const RoiPatch p = scaled_copies(8, 6, std::vector<cplx>(5, 1.0), &s);
  const Rank1Result r = rank1_compound(p);
  EXPECT_FALSE(r.fallback);
  EXPECT_NEAR(correlation(r.image, s), 1.0, 1e-9);
  // u1 * s1 = sqrt(K) * S with the phase fixed by the mean.
  for (std::size_t i = 0; i < s.size(); ++i) {
    EXPECT_LT(std::abs(r.image.flat()[i] - std::sqrt(5.0) * s.flat()[i]),
              1e-9);
  }
}

TEST(Rank1, AlternatingSignsStillRecoverSlab) {
  Matrix<cplx> s;
  const RoiPatch p = scaled_copies(6, 6, {1.0, -1.0, 1.0, -1.0}, &s);
  const Eigen::MatrixXcd c = casorati(p);
  EXPECT_LT(c.rowwise().mean().norm(), 1e-12);
  const Rank1Result r = rank1_compound(p);
  EXPECT_NEAR(correlation(r.image, s), 1.0, 1e-9);
  EXPECT_NEAR(r.singular_value, 2.0 * c.col(0).norm(), 1e-9);
  // Deterministic phase even with a zero mean.
  EXPECT_EQ(rank1_compound(p).image, r.image);
}

TEST(Rank1, MatchesPowerIterationOracle) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const RoiPatch p = random_patch(8, 8, 4, 10 + seed);
    const Eigen::MatrixXcd c = casorati(p);
    std::vector<cplx> flat(c.data(), c.data() + c.size());
    const auto ref = oracle::power_iteration(flat, 64, 4);
    const Rank1Result r = rank1_compound(p);
    EXPECT_NEAR(r.singular_value, ref.sigma1, 1e-6);
    cplx inner = 0.0;
    for (std::size_t l = 0; l < 8; ++l) {
      for (std::size_t a = 0; a < 8; ++a) {
        inner += std::conj(r.image(a, l) / r.singular_value) *
                 ref.u1[a + 8 * l];
      }
    }
    EXPECT_NEAR(std::abs(inner), 1.0, 1e-6);
  }
}

TEST(Rank1, PhaseAlignedWithMean) {
  const RoiPatch p = random_patch(8, 8, 6, 77);
  const Rank1Result r = rank1_compound(p);
  const Eigen::MatrixXcd c = casorati(p);
  const Eigen::VectorXcd mean = c.rowwise().mean();
  cplx inner = 0.0;
  for (std::size_t l = 0; l < 8; ++l) {
    for (std::size_t a = 0; a < 8; ++a) {
      inner += std::conj(r.image(a, l)) * mean(static_cast<Eigen::Index>(a + 8 * l));
    }
  }
  EXPECT_GE(inner.real(), 0.0);
  EXPECT_NEAR(inner.imag(), 0.0, 1e-12 * std::abs(inner));
}

TEST(Rank1, UnitaryInvariance) {
  const RoiPatch p = random_patch(8, 8, 5, 3);
  RoiPatch q = p;
  const cplx phase = std::polar(1.0, 1.234);
  for (auto &v : q.data.storage()) {
    v *= phase;
  }
  const Rank1Result rp = rank1_compound(p);
  const Rank1Result rq = rank1_compound(q);
  for (std::size_t i = 0; i < rp.image.size(); ++i) {
    EXPECT_NEAR(std::abs(rp.image.flat()[i]), std::abs(rq.image.flat()[i]),
                1e-9);
  }
}

TEST(Rank1, EnergyBound) {
  const RoiPatch p = random_patch(8, 8, 5, 4);
  EXPECT_LT(rank1_compound(p).singular_value, casorati(p).norm());
  const RoiPatch r1 = scaled_copies(8, 8, {1.0, cplx(0.0, 2.0), -0.5}, nullptr);
  EXPECT_NEAR(rank1_compound(r1).singular_value, casorati(r1).norm(), 1e-9);
}

TEST(Rank1, ZeroPatchAndBadShape) {
  const RoiPatch zero{0, 0, Tensor3<cplx>(4, 4, 3)};
  const Rank1Result r = rank1_compound(zero);
  EXPECT_FALSE(r.fallback);
  for (const auto &v : r.image.flat()) {
    EXPECT_EQ(v, cplx(0.0));
  }
  EXPECT_THROW(rank1_compound(random_patch(4, 4, 1, 0)),
               std::invalid_argument);
}

TEST(IqTensor, ColumnsAreAnalyticSignals) {
  std::mt19937_64 gen(5);
  std::normal_distribution<double> dist;
  DasTensor t{Tensor3<double>(40, 3, 2), ImagingConfig{}, AngleSet{}};
  for (double &v : t.z.storage()) {
    v = dist(gen);
  }
  const IqTensor iq = iq_tensor(t);
  for (std::size_t l = 0; l < 3; ++l) {
    for (std::size_t k = 0; k < 2; ++k) {
      std::vector<double> col(40);
      for (std::size_t a = 0; a < 40; ++a) {
        col[a] = t.z(a, l, k);
      }
      const auto ref = oracle::analytic_dft(col);
      for (std::size_t a = 0; a < 40; ++a) {
        EXPECT_LT(std::abs(iq.zt(a, l, k) - ref[a]), 1e-9);
      }
    }
  }
}

TEST(SvdBeamform, TilesAndEdges) {
  DasTensor t{Tensor3<double>(64, 64, 3), ImagingConfig{}, AngleSet{}};
  std::mt19937_64 gen(6);
  std::normal_distribution<double> dist;
  for (double &v : t.z.storage()) {
    v = dist(gen);
  }
  EXPECT_EQ(svd_beamform(t, 32, 32).patches, 4U);
  DasTensor u{Tensor3<double>(70, 40, 3), ImagingConfig{}, AngleSet{}};
  for (double &v : u.z.storage()) {
    v = dist(gen);
  }
  const auto r = svd_beamform(u, 32, 32);
  EXPECT_EQ(r.patches, 6U);
  EXPECT_EQ(r.fallbacks, 0U);
  EXPECT_EQ(r.image.v.rows(), 70U);
  EXPECT_EQ(r.image.v.cols(), 40U);
  // Every edge remainder is its own patch: compare against a direct call.
  const IqTensor iq = iq_tensor(u);
  const Rank1Result corner = rank1_compound(extract_patch(iq, 64, 32, 6, 8));
  for (std::size_t a = 0; a < 6; ++a) {
    for (std::size_t l = 0; l < 8; ++l) {
      EXPECT_EQ(r.iq(64 + a, 32 + l), corner.image(a, l));
    }
  }
  EXPECT_THROW(svd_beamform(u, 71, 8), std::invalid_argument);
  EXPECT_THROW(svd_beamform(u, 8, 41), std::invalid_argument);
  EXPECT_THROW(svd_beamform(u, 0, 8), std::invalid_argument);
}

TEST(SvdBeamform, RankOneTensorMatchesCpcBmode) {
  DasTensor t{Tensor3<double>(96, 64, 7), ImagingConfig{}, AngleSet{}};
  std::mt19937_64 gen(8);
  std::normal_distribution<double> dist;
  for (std::size_t a = 0; a < 96; ++a) {
    for (std::size_t l = 0; l < 64; ++l) {
      const double v = dist(gen);
      for (std::size_t k = 0; k < 7; ++k) {
        t.z(a, l, k) = v;
      }
    }
  }
  const BmodeImage ref = bmode(cpc(t), 60.0);
  const BmodeImage got = log_compress(svd_beamform(t, 32, 32).envelope, 60.0);
  for (std::size_t i = 0; i < ref.db.size(); ++i) {
    EXPECT_NEAR(got.db.flat()[i], ref.db.flat()[i], 0.1);
  }
}

TEST(SvdBeamform, Deterministic) {
  DasTensor t{Tensor3<double>(40, 40, 4), ImagingConfig{}, AngleSet{}};
  std::mt19937_64 gen(9);
  std::normal_distribution<double> dist;
  for (double &v : t.z.storage()) {
    v = dist(gen);
  }
  set_threads(1);
  const auto a = svd_beamform(t, 16, 16);
  set_threads(3);
  const auto b = svd_beamform(t, 16, 16);
  set_threads(1);
  EXPECT_EQ(a.iq, b.iq);
}
