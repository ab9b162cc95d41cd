#pragma once

#include "pwbf/beamform.hpp"
#include "pwbf/config.hpp"
#include "pwbf/tensor.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace pwbf {

// Compounded RF image v(a, l), before envelope detection.
struct CompoundImage {
  Matrix<double> v;
  ImagingConfig imaging{};
};

inline std::vector<std::size_t> select_subset(std::size_t k_full,
                                              std::size_t k) {
  return decimation_indices(k_full, k);
}

inline std::vector<std::size_t> all_planewaves(std::size_t k) {
  std::vector<std::size_t> idx(k);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  return idx;
}

namespace detail {

inline void check_subset(const DasTensor &t,
                         const std::vector<std::size_t> &subset) {
  if (subset.empty()) {
    throw std::invalid_argument("compound: empty plane-wave subset");
  }
  std::vector<std::size_t> sorted = subset;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw std::invalid_argument("compound: duplicate plane-wave index");
  }
  if (sorted.back() >= t.planewaves()) {
    throw std::invalid_argument("compound: plane-wave index out of range");
  }
}

} // namespace detail

// Coherent compounding: average of the selected plane-wave images. Summation
// runs in ascending index order regardless of how `subset` is ordered.
inline CompoundImage cpc(const DasTensor &t,
                         const std::vector<std::size_t> &subset) {
  detail::check_subset(t, subset);
  std::vector<std::size_t> order = subset;
  std::sort(order.begin(), order.end());
  const std::size_t na = t.depth();
  const std::size_t nl = t.lines();
  const double inv = 1.0 / static_cast<double>(order.size());
  CompoundImage out{Matrix<double>(na, nl), t.imaging};
  for (std::size_t a = 0; a < na; ++a) {
    for (std::size_t l = 0; l < nl; ++l) {
      double acc = 0.0;
      for (std::size_t k : order) {
        acc += t.z(a, l, k);
      }
      out.v(a, l) = acc * inv;
    }
  }
  return out;
}

inline CompoundImage cpc(const DasTensor &t) {
  return cpc(t, all_planewaves(t.planewaves()));
}

// Copy of the tensor restricted to the given plane waves, in the given order.
inline DasTensor take_planewaves(const DasTensor &t,
                                 const std::vector<std::size_t> &subset) {
  detail::check_subset(t, subset);
  DasTensor out{Tensor3<double>(t.depth(), t.lines(), subset.size()),
                t.imaging, AngleSet{}};
  for (std::size_t j = 0; j < subset.size(); ++j) {
    if (subset[j] < t.angles.size()) {
      out.angles.angles.push_back(t.angles.angles[subset[j]]);
    }
  }
  for (std::size_t a = 0; a < t.depth(); ++a) {
    for (std::size_t l = 0; l < t.lines(); ++l) {
      for (std::size_t j = 0; j < subset.size(); ++j) {
        out.z(a, l, j) = t.z(a, l, subset[j]);
      }
    }
  }
  return out;
}

} // namespace pwbf
