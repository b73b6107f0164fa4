#pragma once

#include <cstddef>
#include <vector>

#include "jointmap/baseline/sparse.hpp"

namespace jointmap::baseline {

struct Neighbor {
  std::size_t id = 0;  // position in the index
  double distance = 0.0;  // 1 - cosine similarity
};

struct KnnResult {
  std::vector<Neighbor> neighbors;
  // Set when fewer than k vectors were available.
  bool truncated = false;
};

// Exact k-nearest-neighbour search by cosine distance over sparse vectors.
// Zero vectors have similarity 0 (distance 1) to everything. Ties are broken
// by ascending id.
class KnnIndex {
 public:
  explicit KnnIndex(std::vector<SparseVector> vectors);

  std::size_t size() const noexcept { return vectors_.size(); }
  const SparseVector& vector(std::size_t id) const { return vectors_[id]; }

  // Throws InputError for an empty index or k == 0.
  KnnResult query(const SparseVector& q, std::size_t k) const;

 private:
  struct Posting {
    std::size_t doc;
    double weight;
  };
  std::vector<SparseVector> vectors_;
  std::vector<double> norms_;
  std::vector<std::vector<Posting>> postings_;
};

}  // namespace jointmap::baseline
