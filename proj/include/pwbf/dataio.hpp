#pragma once

#include "pwbf/tensor.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <stdexcept>
#include <string>
#include <vector>

namespace pwbf {

// UTB1 tensor blob:
//   "UTB1" | dtype u8 | ndim u8 | ndim x u32 dims | payload
// Little-endian throughout, payload row-major with the last index fastest.
enum class DType : std::uint8_t { F32 = 0, F64 = 1, C32 = 2 };

inline std::size_t dtype_size(DType t) {
  switch (t) {
  case DType::F32:
    return 4;
  case DType::F64:
    return 8;
  case DType::C32:
    return 8;
  }
  return 0;
}

class BlobError : public std::runtime_error {
public:
  enum class Code {
    Io = 1,
    BadMagic = 2,
    BadHeader = 3,
    Truncated = 4,
    TrailingBytes = 5,
    DTypeMismatch = 6,
    ShapeMismatch = 7,
  };
  BlobError(Code code, const std::string &what)
      : std::runtime_error(what), code_(code) {}
  [[nodiscard]] Code code() const { return code_; }

private:
  Code code_;
};

struct TensorBlob {
  DType dtype{DType::F64};
  std::vector<std::uint32_t> dims;
  std::vector<double> real;                // F32 / F64 payload
  std::vector<std::complex<float>> cplx32; // C32 payload

  [[nodiscard]] std::size_t count() const {
    std::size_t n = 1;
    for (auto d : dims) {
      n *= d;
    }
    return n;
  }
  bool operator==(const TensorBlob &) const = default;
};

namespace detail {

static_assert(std::endian::native == std::endian::little ||
                  std::endian::native == std::endian::big,
              "mixed-endian platforms are not supported");

template <typename U> void put_le(std::vector<char> &out, U v) {
  static_assert(std::is_unsigned_v<U>);
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
}

template <typename U> U get_le(const unsigned char *p) {
  U v = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    v |= static_cast<U>(p[i]) << (8 * i);
  }
  return v;
}

} // namespace detail

inline std::vector<char> encode_blob(const TensorBlob &blob) {
  if (blob.dims.empty() || blob.dims.size() > 255) {
    throw BlobError(BlobError::Code::BadHeader, "blob: ndim must be 1..255");
  }
  for (auto d : blob.dims) {
    if (d == 0) {
      throw BlobError(BlobError::Code::BadHeader, "blob: zero dimension");
    }
  }
  const std::size_t n = blob.count();
  const bool is_complex = blob.dtype == DType::C32;
  if ((is_complex ? blob.cplx32.size() : blob.real.size()) != n) {
    throw BlobError(BlobError::Code::ShapeMismatch,
                    "blob: payload does not match dims");
  }
  std::vector<char> out{'U', 'T', 'B', '1'};
  out.reserve(6 + 4 * blob.dims.size() + n * dtype_size(blob.dtype));
  out.push_back(static_cast<char>(blob.dtype));
  out.push_back(static_cast<char>(blob.dims.size()));
  for (auto d : blob.dims) {
    detail::put_le<std::uint32_t>(out, d);
  }
  switch (blob.dtype) {
  case DType::F32:
    for (double v : blob.real) {
      detail::put_le(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
    }
    break;
  case DType::F64:
    for (double v : blob.real) {
      detail::put_le(out, std::bit_cast<std::uint64_t>(v));
    }
    break;
  case DType::C32:
    for (const auto &v : blob.cplx32) {
      detail::put_le(out, std::bit_cast<std::uint32_t>(v.real()));
      detail::put_le(out, std::bit_cast<std::uint32_t>(v.imag()));
    }
    break;
  }
  return out;
}

inline TensorBlob decode_blob(const std::vector<char> &bytes) {
  const auto *p = reinterpret_cast<const unsigned char *>(bytes.data());
  const std::size_t size = bytes.size();
  if (size < 4 || std::memcmp(p, "UTB1", 4) != 0) {
    throw BlobError(BlobError::Code::BadMagic, "blob: bad magic");
  }
  if (size < 6) {
    throw BlobError(BlobError::Code::Truncated, "blob: truncated header");
  }
  TensorBlob blob;
  if (p[4] > 2) {
    throw BlobError(BlobError::Code::BadHeader, "blob: unknown dtype");
  }
  blob.dtype = static_cast<DType>(p[4]);
  const std::size_t ndim = p[5];
  if (ndim == 0) {
    throw BlobError(BlobError::Code::BadHeader, "blob: ndim is zero");
  }
  if (size < 6 + 4 * ndim) {
    throw BlobError(BlobError::Code::Truncated, "blob: truncated dims");
  }
  for (std::size_t i = 0; i < ndim; ++i) {
    const auto d = detail::get_le<std::uint32_t>(p + 6 + 4 * i);
    if (d == 0) {
      throw BlobError(BlobError::Code::BadHeader, "blob: zero dimension");
    }
    blob.dims.push_back(d);
  }
  const std::size_t n = blob.count();
  const std::size_t header = 6 + 4 * ndim;
  const std::size_t payload = n * dtype_size(blob.dtype);
  if (size < header + payload) {
    throw BlobError(BlobError::Code::Truncated, "blob: truncated payload");
  }
  if (size > header + payload) {
    throw BlobError(BlobError::Code::TrailingBytes, "blob: trailing bytes");
  }
  const unsigned char *q = p + header;
  switch (blob.dtype) {
  case DType::F32:
    blob.real.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      blob.real[i] =
          std::bit_cast<float>(detail::get_le<std::uint32_t>(q + 4 * i));
    }
    break;
  case DType::F64:
    blob.real.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      blob.real[i] =
          std::bit_cast<double>(detail::get_le<std::uint64_t>(q + 8 * i));
    }
    break;
  case DType::C32:
    blob.cplx32.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      blob.cplx32[i] = {
          std::bit_cast<float>(detail::get_le<std::uint32_t>(q + 8 * i)),
          std::bit_cast<float>(detail::get_le<std::uint32_t>(q + 8 * i + 4))};
    }
    break;
  }
  return blob;
}

inline void write_file(const std::filesystem::path &path,
                       const std::vector<char> &bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw BlobError(BlobError::Code::Io, "cannot write " + path.string());
  }
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) {
    throw BlobError(BlobError::Code::Io, "write failed: " + path.string());
  }
}

inline std::vector<char> read_file(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw BlobError(BlobError::Code::Io, "cannot open " + path.string());
  }
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_blob(const std::filesystem::path &path,
                       const TensorBlob &blob) {
  write_file(path, encode_blob(blob));
}

inline TensorBlob read_blob(const std::filesystem::path &path) {
  return decode_blob(read_file(path));
}

inline TensorBlob to_blob(const Tensor3<double> &t, DType dtype = DType::F64) {
  const auto [d0, d1, d2] = t.dims();
  return {dtype,
          {static_cast<std::uint32_t>(d0), static_cast<std::uint32_t>(d1),
           static_cast<std::uint32_t>(d2)},
          t.storage(),
          {}};
}

inline TensorBlob to_blob(const Matrix<double> &m, DType dtype = DType::F64) {
  return {dtype,
          {static_cast<std::uint32_t>(m.rows()),
           static_cast<std::uint32_t>(m.cols())},
          m.storage(),
          {}};
}

inline TensorBlob to_blob(const Matrix<cplx> &m) {
  TensorBlob b{DType::C32,
               {static_cast<std::uint32_t>(m.rows()),
                static_cast<std::uint32_t>(m.cols())},
               {},
               {}};
  b.cplx32.reserve(m.size());
  for (const auto &v : m.flat()) {
    b.cplx32.emplace_back(static_cast<float>(v.real()),
                          static_cast<float>(v.imag()));
  }
  return b;
}

inline Tensor3<double> blob_to_tensor3(const TensorBlob &b) {
  if (b.dtype == DType::C32) {
    throw BlobError(BlobError::Code::DTypeMismatch,
                    "blob: expected a real tensor");
  }
  if (b.dims.size() != 3) {
    throw BlobError(BlobError::Code::ShapeMismatch,
                    "blob: expected a 3-D tensor");
  }
  Tensor3<double> t(b.dims[0], b.dims[1], b.dims[2]);
  t.storage() = b.real;
  return t;
}

inline Matrix<double> blob_to_matrix(const TensorBlob &b) {
  if (b.dtype == DType::C32) {
    throw BlobError(BlobError::Code::DTypeMismatch,
                    "blob: expected a real matrix");
  }
  if (b.dims.size() != 2) {
    throw BlobError(BlobError::Code::ShapeMismatch,
                    "blob: expected a 2-D tensor");
  }
  Matrix<double> m(b.dims[0], b.dims[1]);
  m.storage() = b.real;
  return m;
}

// 8-bit binary PGM (P5): width = scanlines, height = depth samples,
// gray = round(255 * (db + DR) / DR).
inline std::vector<char> encode_pgm(const Matrix<double> &db,
                                    double dynamic_range) {
  const std::string header = "P5\n" + std::to_string(db.cols()) + " " +
                             std::to_string(db.rows()) + "\n255\n";
  std::vector<char> out(header.begin(), header.end());
  out.reserve(header.size() + db.size());
  for (double v : db.flat()) {
    const double g = std::round(255.0 * (v + dynamic_range) / dynamic_range);
    out.push_back(static_cast<char>(
        static_cast<unsigned char>(std::clamp(g, 0.0, 255.0))));
  }
  return out;
}

inline void write_pgm(const std::filesystem::path &path,
                      const Matrix<double> &db, double dynamic_range) {
  write_file(path, encode_pgm(db, dynamic_range));
}

// Reads a P5 image back into dB values on [-DR, 0].
inline Matrix<double> read_pgm_db(const std::filesystem::path &path,
                                  double dynamic_range) {
  const auto bytes = read_file(path);
  std::size_t pos = 0;
  auto token = [&]() {
    for (;;) {
      while (pos < bytes.size() && std::isspace(static_cast<unsigned char>(
                                       bytes[pos]))) {
        ++pos;
      }
      if (pos < bytes.size() && bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') {
          ++pos;
        }
        continue;
      }
      break;
    }
    std::string t;
    while (pos < bytes.size() &&
           !std::isspace(static_cast<unsigned char>(bytes[pos]))) {
      t.push_back(bytes[pos++]);
    }
    return t;
  };
  if (token() != "P5") {
    throw BlobError(BlobError::Code::BadMagic, "pgm: not a P5 file: " +
                                                   path.string());
  }
  std::size_t w = 0, h = 0, maxval = 0;
  try {
    w = std::stoul(token());
    h = std::stoul(token());
    maxval = std::stoul(token());
  } catch (const std::exception &) {
    throw BlobError(BlobError::Code::BadHeader, "pgm: bad header: " +
                                                    path.string());
  }
  if (maxval != 255 || w == 0 || h == 0) {
    throw BlobError(BlobError::Code::BadHeader,
                    "pgm: only 8-bit images are supported");
  }
  ++pos; // single whitespace after maxval
  if (bytes.size() < pos + w * h) {
    throw BlobError(BlobError::Code::Truncated, "pgm: truncated pixel data");
  }
  Matrix<double> db(h, w);
  for (std::size_t i = 0; i < w * h; ++i) {
    const auto g = static_cast<unsigned char>(bytes[pos + i]);
    db.storage()[i] =
        static_cast<double>(g) * dynamic_range / 255.0 - dynamic_range;
  }
  return db;
}

} // namespace pwbf
