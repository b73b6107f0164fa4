#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "jointmap/baseline/sparse.hpp"

namespace jointmap::baseline {

// Unigram and bigram terms of a token list; bigrams are joined by a space.
std::vector<std::string> ngram_terms(const std::vector<std::string>& tokens);

// n-gram (n = 1, 2) tf*idf featurizer with smoothed idf
//   idf(t) = ln((1 + N) / (1 + df(t))) + 1
// and L2-normalized output. Vocabulary is ordered lexicographically.
class TfIdfVectorizer {
 public:
  TfIdfVectorizer() = default;
  TfIdfVectorizer(std::vector<std::string> vocabulary, std::vector<double> idf,
                  std::size_t documents);

  // Throws ConfigError on an empty corpus.
  static TfIdfVectorizer fit(const std::vector<std::vector<std::string>>& documents);

  // Out-of-vocabulary terms are ignored; an all-OOV query maps to zero.
  SparseVector transform(const std::vector<std::string>& tokens) const;

  std::size_t dimension() const noexcept { return vocabulary_.size(); }
  std::size_t documents() const noexcept { return documents_; }
  const std::vector<std::string>& vocabulary() const noexcept { return vocabulary_; }
  const std::vector<double>& idf() const noexcept { return idf_; }
  std::optional<std::size_t> index_of(const std::string& term) const;

 private:
  std::vector<std::string> vocabulary_;
  std::vector<double> idf_;
  std::size_t documents_ = 0;
};

}  // namespace jointmap::baseline
