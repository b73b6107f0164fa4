#pragma once

#include <cstdint>
#include <vector>

namespace jointmap::baseline {

// Sparse feature vector with strictly increasing indices.
struct SparseVector {
  std::vector<std::uint32_t> indices;
  std::vector<double> values;

  std::size_t nnz() const noexcept { return indices.size(); }
  double squared_norm() const {
    double s = 0.0;
    for (double v : values) s += v * v;
    return s;
  }
};

inline double dot(const SparseVector& a, const SparseVector& b) {
  double s = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.indices.size() && j < b.indices.size()) {
    if (a.indices[i] < b.indices[j]) {
      ++i;
    } else if (a.indices[i] > b.indices[j]) {
      ++j;
    } else {
      s += a.values[i++] * b.values[j++];
    }
  }
  return s;
}

}  // namespace jointmap::baseline
