#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace jointmap::model {

struct ModelConfig {
  std::size_t vocab_size = 0;  // word-table rows, including the UNK row
  std::size_t embedding_dim = 300;
  std::size_t query_length = 10;
  std::size_t categories = 0;
  std::size_t intents = 2;
  std::size_t heads = 10;
  double focal_gamma = 1.5;
  std::vector<double> focal_alpha;  // per category; empty means all 1
  double beta_category = 0.5;
  double beta_intent = 0.5;
  double dropout = 0.5;
  double category_threshold = 0.5;
  double embedding_init_scale = 0.1;
  double gate_bias_init = -1.0;

  // Throws ConfigError.
  void validate() const;
  std::size_t key_dim() const { return query_length / heads; }
  std::size_t label_count() const { return categories + intents; }
  double alpha(std::size_t category) const {
    return focal_alpha.empty() ? 1.0 : focal_alpha[category];
  }
};

// Word vocabulary of the embedding table. Row 0 is the shared UNK row.
class Vocabulary {
 public:
  static constexpr std::size_t kUnk = 0;
  static constexpr const char* kUnkToken = "<unk>";

  Vocabulary();
  // Distinct tokens of the given lists, ordered lexicographically after UNK.
  static Vocabulary build(const std::vector<std::vector<std::string>>& token_lists);
  // Rebuilds from a stored token list whose first entry is the UNK token.
  static Vocabulary from_tokens(std::vector<std::string> tokens);

  std::size_t size() const noexcept { return tokens_.size(); }
  std::size_t id(const std::string& token) const;
  std::optional<std::size_t> find(const std::string& token) const;
  const std::vector<std::string>& tokens() const noexcept { return tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace jointmap::model
