#include "pwbf/aberration.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace pwbf;

TEST(SigmaLevels, Values) {
  const auto s = sigma_levels();
  ASSERT_EQ(s.size(), 3U);
  EXPECT_EQ(s[0], 0.0);
  EXPECT_EQ(s[1], 1.54);
  EXPECT_EQ(s[2], 3.85);
  EXPECT_NEAR(s[1] / 1540.0, 0.001, 1e-15);
  EXPECT_NEAR(s[2] / 1540.0, 0.0025, 1e-15);
}

TEST(Profile, ZeroSigmaIsConstant) {
  const auto p = sample_profile(1540.0, 0.0, 192, 31, 9);
  for (double v : p.sos.flat()) {
    ASSERT_EQ(v, 1540.0);
  }
}

TEST(Profile, Bounded) {
  const auto p = sample_profile(1540.0, 3.85, 192, 31, 9);
  for (double v : p.sos.flat()) {
    ASSERT_GE(v, 1536.15);
    ASSERT_LE(v, 1543.85);
  }
}

TEST(Profile, Reproducible) {
  const auto a = sample_profile(1540.0, 1.54, 64, 15, 77);
  const auto b = sample_profile(1540.0, 1.54, 64, 15, 77);
  const auto c = sample_profile(1540.0, 1.54, 64, 15, 78);
  EXPECT_EQ(a.sos, b.sos);
  EXPECT_NE(a.sos, c.sos);
}

TEST(Profile, UniformMoments) {
  const double sigma = 1.54;
  const auto p = sample_profile(1540.0, sigma, 100, 100, 2024);
  double mean = 0.0;
  for (double v : p.sos.flat()) {
    mean += v;
  }
  mean /= static_cast<double>(p.sos.size());
  double var = 0.0;
  for (double v : p.sos.flat()) {
    var += (v - mean) * (v - mean);
  }
  var /= static_cast<double>(p.sos.size());
  EXPECT_NEAR(mean, 1540.0, 0.05);
  EXPECT_NEAR(var, sigma * sigma / 3.0, 0.1 * sigma * sigma / 3.0);
}

TEST(Profile, NoLagOneCorrelation) {
  const std::size_t n = 100;
  const auto p = sample_profile(0.0, 1.0, n, n, 5);
  auto corr = [&](int dl, int dk) {
    double num = 0.0;
    double den = 0.0;
    for (std::size_t l = 0; l + dl < n; ++l) {
      for (std::size_t k = 0; k + dk < n; ++k) {
        num += p.sos(l, k) * p.sos(l + dl, k + dk);
      }
    }
    for (double v : p.sos.flat()) {
      den += v * v;
    }
    return num / den;
  };
  EXPECT_LT(std::abs(corr(1, 0)), 0.05);
  EXPECT_LT(std::abs(corr(0, 1)), 0.05);
}

TEST(Profile, RejectsBadArguments) {
  EXPECT_THROW(sample_profile(1540.0, -1.0, 4, 4, 0), std::invalid_argument);
  EXPECT_THROW(sample_profile(1540.0, 1.0, 0, 4, 0), std::invalid_argument);
  EXPECT_EQ(uniform_profile(1500.0, 3, 2).sos, Matrix<double>(3, 2, 1500.0));
}
