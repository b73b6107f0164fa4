#include "jointmap/model/config.hpp"

#include <algorithm>
#include <set>

#include "jointmap/error.hpp"

namespace jointmap::model {

void ModelConfig::validate() const {
  if (vocab_size < 1) throw ConfigError("vocabulary must hold at least the UNK row");
  if (embedding_dim < 1) throw ConfigError("embedding dimension must be >= 1");
  if (query_length < 1) throw ConfigError("query length must be >= 1");
  if (categories < 1) throw ConfigError("need at least one category");
  if (intents != 2) throw ConfigError("the intent task is binary");
  if (heads < 1 || query_length % heads != 0) {
    throw ConfigError("head count " + std::to_string(heads) + " must divide the query length " +
                      std::to_string(query_length));
  }
  if (!(focal_gamma >= 0.0)) throw ConfigError("focal gamma must be >= 0");
  if (!focal_alpha.empty()) {
    if (focal_alpha.size() != categories) throw ConfigError("need one focal alpha per category");
    for (double a : focal_alpha) {
      if (!(a > 0.0)) throw ConfigError("focal alpha must be positive");
    }
  }
  if (!(beta_category >= 0.0) || !(beta_intent >= 0.0)) {
    throw ConfigError("loss weights must be >= 0");
  }
  if (beta_category == 0.0 && beta_intent == 0.0) throw ConfigError("both loss weights are zero");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("dropout must lie in [0, 1)");
  if (!(category_threshold >= 0.0 && category_threshold <= 1.0)) {
    throw ConfigError("category threshold must lie in [0, 1]");
  }
}

Vocabulary::Vocabulary() : tokens_{kUnkToken} { index_[kUnkToken] = kUnk; }

Vocabulary Vocabulary::build(const std::vector<std::vector<std::string>>& token_lists) {
  std::set<std::string> distinct;
  for (const auto& list : token_lists) distinct.insert(list.begin(), list.end());
  distinct.erase(kUnkToken);
  std::vector<std::string> tokens{kUnkToken};
  tokens.insert(tokens.end(), distinct.begin(), distinct.end());
  return from_tokens(std::move(tokens));
}

Vocabulary Vocabulary::from_tokens(std::vector<std::string> tokens) {
  if (tokens.empty() || tokens.front() != kUnkToken) {
    throw InputError("vocabulary must start with the UNK token");
  }
  Vocabulary v;
  v.tokens_ = std::move(tokens);
  v.index_.clear();
  for (std::size_t i = 0; i < v.tokens_.size(); ++i) {
    if (!v.index_.emplace(v.tokens_[i], i).second) {
      throw InputError("duplicate vocabulary token '" + v.tokens_[i] + "'");
    }
  }
  return v;
}

std::size_t Vocabulary::id(const std::string& token) const {
  const auto it = index_.find(token);
  return it == index_.end() ? kUnk : it->second;
}

std::optional<std::size_t> Vocabulary::find(const std::string& token) const {
  const auto it = index_.find(token);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

}  // namespace jointmap::model
