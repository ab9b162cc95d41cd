#include "pwbf/dataio.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <random>

using namespace pwbf;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string &name) {
  const fs::path p = fs::temp_directory_path() / ("pwbf_dataio_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

BlobError::Code decode_error(const std::vector<char> &bytes) {
  try {
    decode_blob(bytes);
  } catch (const BlobError &e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return BlobError::Code::Io;
}

} // namespace

TEST(Blob, SingleFloatLayout) {
  // One element, one dimension: magic, dtype, ndim, one u32 dim, one f32.
  const TensorBlob b{DType::F32, {1}, {3.5}, {}};
  const auto bytes = encode_blob(b);
  ASSERT_EQ(bytes.size(), 4U + 1U + 1U + 4U + 4U);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "UTB1");
  EXPECT_EQ(bytes[4], 0);
  EXPECT_EQ(bytes[5], 1);
  EXPECT_EQ(static_cast<unsigned char>(bytes[6]), 1);
  EXPECT_EQ(bytes[7], 0);
  // 3.5f = 0x40600000, little-endian
  EXPECT_EQ(static_cast<unsigned char>(bytes[10]), 0x00);
  EXPECT_EQ(static_cast<unsigned char>(bytes[12]), 0x60);
  EXPECT_EQ(static_cast<unsigned char>(bytes[13]), 0x40);
  EXPECT_EQ(encode_blob(TensorBlob{DType::F32, {1, 1}, {3.5}, {}}).size(), 18U);
}

TEST(Blob, F64RoundTripIsBitwise) {
  std::mt19937_64 gen(1);
  std::normal_distribution<double> dist;
  Tensor3<double> t(31, 64, 192);
  for (double &v : t.storage()) {
    v = dist(gen);
  }
  t.storage()[0] = -0.0;
  t.storage()[1] = std::numeric_limits<double>::denorm_min();
  const fs::path dir = temp_dir("f64");
  write_blob(dir / "t.utb", to_blob(t));
  const Tensor3<double> back = blob_to_tensor3(read_blob(dir / "t.utb"));
  ASSERT_EQ(back.dims(), t.dims());
  EXPECT_EQ(std::memcmp(back.storage().data(), t.storage().data(),
                        t.size() * sizeof(double)),
            0);
  EXPECT_EQ(fs::file_size(dir / "t.utb"), 6U + 12U + t.size() * 8U);
}

TEST(Blob, F32AndC32RoundTrip) {
  std::mt19937_64 gen(2);
  std::normal_distribution<float> dist;
  TensorBlob f{DType::F32, {7, 5}, {}, {}};
  for (int i = 0; i < 35; ++i) {
    f.real.push_back(static_cast<double>(dist(gen)));
  }
  EXPECT_EQ(decode_blob(encode_blob(f)), f);
  TensorBlob c{DType::C32, {3, 4, 2}, {}, {}};
  for (int i = 0; i < 24; ++i) {
    c.cplx32.emplace_back(dist(gen), dist(gen));
  }
  EXPECT_EQ(decode_blob(encode_blob(c)), c);
  const auto bytes = encode_blob(c);
  EXPECT_EQ(decode_blob(bytes).cplx32, c.cplx32);
  EXPECT_EQ(encode_blob(decode_blob(bytes)), bytes);
}

TEST(Blob, MatrixHelpers) {
  Matrix<double> m(3, 4);
  for (std::size_t i = 0; i < 12; ++i) {
    m.flat()[i] = static_cast<double>(i) - 5.5;
  }
  EXPECT_EQ(blob_to_matrix(decode_blob(encode_blob(to_blob(m)))), m);
  Matrix<cplx> z(2, 2, cplx(1.5, -2.0));
  const TensorBlob zb = to_blob(z);
  EXPECT_EQ(zb.dtype, DType::C32);
  EXPECT_EQ(zb.cplx32[3], std::complex<float>(1.5F, -2.0F));
}

TEST(Blob, ErrorCodes) {
  const auto good = encode_blob(TensorBlob{DType::F64, {2, 3}, {1, 2, 3, 4, 5, 6}, {}});
  auto bad = good;
  bad[0] = 'X';
  EXPECT_EQ(decode_error(bad), BlobError::Code::BadMagic);
  bad = good;
  bad[4] = 9;
  EXPECT_EQ(decode_error(bad), BlobError::Code::BadHeader);
  bad = good;
  bad.resize(bad.size() - 1);
  EXPECT_EQ(decode_error(bad), BlobError::Code::Truncated);
  bad = good;
  bad.push_back(0);
  EXPECT_EQ(decode_error(bad), BlobError::Code::TrailingBytes);
  bad = good;
  bad[6] = 0;
  EXPECT_EQ(decode_error(bad), BlobError::Code::BadHeader);

  const TensorBlob m = decode_blob(good);
  EXPECT_THROW(blob_to_tensor3(m), BlobError);
  try {
    blob_to_tensor3(m);
  } catch (const BlobError &e) {
    EXPECT_EQ(e.code(), BlobError::Code::ShapeMismatch);
  }
  try {
    blob_to_matrix(TensorBlob{DType::C32, {1, 1}, {}, {{1.0F, 0.0F}}});
  } catch (const BlobError &e) {
    EXPECT_EQ(e.code(), BlobError::Code::DTypeMismatch);
  }
  try {
    read_blob("/nonexistent/x.utb");
    ADD_FAILURE();
  } catch (const BlobError &e) {
    EXPECT_EQ(e.code(), BlobError::Code::Io);
    EXPECT_NE(std::string(e.what()).find("/nonexistent/x.utb"),
              std::string::npos);
  }
}

TEST(Pgm, EncodesGrayLevels) {
  Matrix<double> db(2, 3);
  db(0, 0) = 0.0;
  db(0, 1) = -60.0;
  db(0, 2) = -30.0;
  db(1, 0) = -59.9;
  db(1, 1) = -0.1;
  db(1, 2) = -45.0;
  const auto bytes = encode_pgm(db, 60.0);
  const std::string header = "P5\n3 2\n255\n";
  ASSERT_EQ(bytes.size(), header.size() + 6);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + header.size()), header);
  const auto *px = reinterpret_cast<const unsigned char *>(bytes.data()) +
                   header.size();
  EXPECT_EQ(px[0], 255);
  EXPECT_EQ(px[1], 0);
  EXPECT_EQ(px[2], 128); // round(127.5)
  EXPECT_EQ(px[3], 0);
  EXPECT_EQ(px[4], 255);
  EXPECT_EQ(px[5], 64); // round(63.75)
}

TEST(Pgm, ReadBackQuantizesToGrayLevels) {
  Matrix<double> db(4, 5);
  for (std::size_t i = 0; i < db.size(); ++i) {
    db.flat()[i] = -3.0 * static_cast<double>(i);
  }
  const fs::path dir = temp_dir("pgm");
  write_pgm(dir / "x.pgm", db, 60.0);
  const Matrix<double> back = read_pgm_db(dir / "x.pgm", 60.0);
  ASSERT_EQ(back.rows(), 4U);
  ASSERT_EQ(back.cols(), 5U);
  for (std::size_t i = 0; i < db.size(); ++i) {
    EXPECT_NEAR(back.flat()[i], db.flat()[i], 60.0 / 255.0 / 2.0 + 1e-12);
  }
}
