#include "jointmap/baseline/tfidf.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "jointmap/error.hpp"

namespace jointmap::baseline {

std::vector<std::string> ngram_terms(const std::vector<std::string>& tokens) {
  std::vector<std::string> terms(tokens.begin(), tokens.end());
  for (std::size_t i = 0; i + 1 < tokens.size(); ++i) terms.push_back(tokens[i] + " " + tokens[i + 1]);
  return terms;
}

TfIdfVectorizer::TfIdfVectorizer(std::vector<std::string> vocabulary, std::vector<double> idf,
                                 std::size_t documents)
    : vocabulary_(std::move(vocabulary)), idf_(std::move(idf)), documents_(documents) {
  if (vocabulary_.size() != idf_.size()) throw ShapeError("vocabulary and idf sizes differ");
  if (!std::is_sorted(vocabulary_.begin(), vocabulary_.end()) ||
      std::adjacent_find(vocabulary_.begin(), vocabulary_.end()) != vocabulary_.end()) {
    throw InputError("vocabulary must be strictly sorted");
  }
}

TfIdfVectorizer TfIdfVectorizer::fit(const std::vector<std::vector<std::string>>& documents) {
  if (documents.empty()) throw ConfigError("cannot fit tf*idf on an empty corpus");
  std::map<std::string, std::size_t> df;
  for (const auto& doc : documents) {
    const auto terms = ngram_terms(doc);
    for (const auto& t : std::set<std::string>(terms.begin(), terms.end())) ++df[t];
  }
  std::vector<std::string> vocab;
  std::vector<double> idf;
  vocab.reserve(df.size());
  idf.reserve(df.size());
  const double n = static_cast<double>(documents.size());
  for (const auto& [term, count] : df) {
    vocab.push_back(term);
    idf.push_back(std::log((1.0 + n) / (1.0 + static_cast<double>(count))) + 1.0);
  }
  return TfIdfVectorizer(std::move(vocab), std::move(idf), documents.size());
}

std::optional<std::size_t> TfIdfVectorizer::index_of(const std::string& term) const {
  const auto it = std::lower_bound(vocabulary_.begin(), vocabulary_.end(), term);
  if (it == vocabulary_.end() || *it != term) return std::nullopt;
  return static_cast<std::size_t>(it - vocabulary_.begin());
}

SparseVector TfIdfVectorizer::transform(const std::vector<std::string>& tokens) const {
  std::map<std::uint32_t, double> counts;
  for (const auto& term : ngram_terms(tokens)) {
    if (auto idx = index_of(term)) counts[static_cast<std::uint32_t>(*idx)] += 1.0;
  }
  SparseVector v;
  double norm2 = 0.0;
  for (const auto& [idx, tf] : counts) {
    const double w = tf * idf_[idx];
    v.indices.push_back(idx);
    v.values.push_back(w);
    norm2 += w * w;
  }
  if (norm2 > 0.0) {
    const double inv = 1.0 / std::sqrt(norm2);
    for (double& w : v.values) w *= inv;
  }
  return v;
}

}  // namespace jointmap::baseline
