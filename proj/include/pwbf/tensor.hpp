#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace pwbf {

using cplx = std::complex<double>;

// Dense row-major (last index fastest) storage. Rank 2 and 3 are the only
// shapes the pipeline needs, so they get dedicated accessors.
template <typename T> class Matrix {
public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, T fill = T{})
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  [[nodiscard]] std::size_t rows() const { return rows_; }
  [[nodiscard]] std::size_t cols() const { return cols_; }
  [[nodiscard]] std::size_t size() const { return data_.size(); }
  [[nodiscard]] bool empty() const { return data_.empty(); }

  T &operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const T &operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }

  [[nodiscard]] std::span<T> flat() { return data_; }
  [[nodiscard]] std::span<const T> flat() const { return data_; }
  [[nodiscard]] std::vector<T> &storage() { return data_; }
  [[nodiscard]] const std::vector<T> &storage() const { return data_; }

  bool operator==(const Matrix &) const = default;

private:
  std::size_t rows_{};
  std::size_t cols_{};
  std::vector<T> data_;
};

template <typename T> class Tensor3 {
public:
  Tensor3() = default;
  Tensor3(std::size_t d0, std::size_t d1, std::size_t d2, T fill = T{})
      : dims_{d0, d1, d2}, data_(d0 * d1 * d2, fill) {}

  [[nodiscard]] std::array<std::size_t, 3> dims() const { return dims_; }
  [[nodiscard]] std::size_t dim(std::size_t i) const { return dims_.at(i); }
  [[nodiscard]] std::size_t size() const { return data_.size(); }

  [[nodiscard]] std::size_t index(std::size_t i, std::size_t j,
                                  std::size_t k) const {
    return (i * dims_[1] + j) * dims_[2] + k;
  }
  T &operator()(std::size_t i, std::size_t j, std::size_t k) {
    return data_[index(i, j, k)];
  }
  const T &operator()(std::size_t i, std::size_t j, std::size_t k) const {
    return data_[index(i, j, k)];
  }

  [[nodiscard]] std::span<T> flat() { return data_; }
  [[nodiscard]] std::span<const T> flat() const { return data_; }
  [[nodiscard]] std::vector<T> &storage() { return data_; }
  [[nodiscard]] const std::vector<T> &storage() const { return data_; }

  bool operator==(const Tensor3 &) const = default;

private:
  std::array<std::size_t, 3> dims_{};
  std::vector<T> data_;
};

} // namespace pwbf
