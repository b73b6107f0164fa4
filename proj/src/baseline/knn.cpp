#include "jointmap/baseline/knn.hpp"

#include <algorithm>
#include <cmath>

#include "jointmap/error.hpp"

namespace jointmap::baseline {

KnnIndex::KnnIndex(std::vector<SparseVector> vectors) : vectors_(std::move(vectors)) {
  norms_.reserve(vectors_.size());
  for (std::size_t d = 0; d < vectors_.size(); ++d) {
    const auto& v = vectors_[d];
    norms_.push_back(std::sqrt(v.squared_norm()));
    for (std::size_t k = 0; k < v.indices.size(); ++k) {
      const auto term = v.indices[k];
      if (term >= postings_.size()) postings_.resize(term + 1);
      postings_[term].push_back({d, v.values[k]});
    }
  }
}

KnnResult KnnIndex::query(const SparseVector& q, std::size_t k) const {
  if (vectors_.empty()) throw InputError("knn query on an empty index");
  if (k == 0) throw InputError("knn query needs k >= 1");
  std::vector<double> dots(vectors_.size(), 0.0);
  for (std::size_t i = 0; i < q.indices.size(); ++i) {
    if (q.indices[i] >= postings_.size()) continue;
    const double w = q.values[i];
    for (const auto& p : postings_[q.indices[i]]) dots[p.doc] += w * p.weight;
  }
  const double qn = std::sqrt(q.squared_norm());
  std::vector<Neighbor> all(vectors_.size());
  for (std::size_t d = 0; d < vectors_.size(); ++d) {
    const double denom = qn * norms_[d];
    const double sim = denom > 0.0 ? dots[d] / denom : 0.0;
    all[d] = {d, 1.0 - sim};
  }
  KnnResult result;
  result.truncated = k > all.size();
  const std::size_t take = std::min(k, all.size());
  auto closer = [](const Neighbor& a, const Neighbor& b) {
    return a.distance < b.distance || (a.distance == b.distance && a.id < b.id);
  };
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(take), all.end(), closer);
  all.resize(take);
  result.neighbors = std::move(all);
  return result;
}

}  // namespace jointmap::baseline
