#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "jointmap/corpus/corpus.hpp"
#include "jointmap/model/config.hpp"
#include "jointmap/model/layers.hpp"
#include "jointmap/numerics/param_store.hpp"

namespace jointmap::model {

struct ForwardTrace {
  std::vector<std::size_t> token_ids;  // truncated to query_length
  std::vector<bool> real_positions;    // query_length entries
  Matrix words;                        // n x V embedded query
  Matrix labels;                       // (|C| + |U|) x V
  Matrix compatibility;                // H
  AttentionTrace attention;            // G = attention.output
  AttentionSplit split;
  HighwayTrace highway_category;
  HighwayTrace highway_intent;
  PoolTrace pool_category;
  PoolTrace pool_intent;
  Matrix z_category, z_intent;         // after dropout
  Matrix z_category_mask, z_intent_mask;
  Matrix category_logits;              // 1 x |C|
  Matrix intent_logits;                // 1 x 2
};

struct Prediction {
  corpus::Intent intent = corpus::Intent::kCommercial;
  std::vector<corpus::CategoryId> categories;
  double commercial_probability = 0.0;
  std::vector<double> category_probabilities;
};

// Intent index in the intent logits.
constexpr std::size_t intent_index(corpus::Intent intent) {
  return intent == corpus::Intent::kCommercial ? 0 : 1;
}

class JointMapModel {
 public:
  // Parameters are initialized from `init_rng`.
  JointMapModel(ModelConfig config, Vocabulary vocabulary, numerics::Rng& init_rng);

  const ModelConfig& config() const noexcept { return config_; }
  ModelConfig& mutable_config() noexcept { return config_; }
  const Vocabulary& vocabulary() const noexcept { return vocab_; }
  numerics::ParamStore& params() noexcept { return params_; }
  const numerics::ParamStore& params() const noexcept { return params_; }

  // Token ids, OOV mapped to UNK, truncated to query_length. Throws
  // InputError for an empty token list.
  std::vector<std::size_t> token_ids(const std::vector<std::string>& tokens) const;
  // n x V matrix; rows past the query are zero padding.
  Matrix embed_query(const std::vector<std::string>& tokens) const;
  // Concatenated label matrix [C; U].
  Matrix label_matrix() const;

  // `rng` is required when training (dropout) and ignored otherwise.
  ForwardTrace forward(const std::vector<std::string>& tokens, bool training,
                       numerics::Rng* rng) const;

  // Adds parameter gradients for the given logit gradients into `grads`.
  void backward(const ForwardTrace& trace, const Matrix& grad_category_logits,
                const Matrix& grad_intent_logits, numerics::GradBuffer& grads) const;

  // Non-commercial predictions carry no categories.
  Prediction predict(const std::vector<std::string>& tokens, double category_threshold) const;
  Prediction predict(const std::vector<std::string>& tokens) const {
    return predict(tokens, config_.category_threshold);
  }

  // Replaces word-table rows for tokens found in a text file of
  // "token v1 ... vV" lines. Returns the number of rows loaded.
  std::size_t load_word_vectors(const std::filesystem::path& path);

  // Parameter indices, in declaration order.
  struct Slots {
    std::size_t word_embedding, category_embedding, intent_embedding;
    std::vector<std::size_t> head_query, head_key, head_value;
    std::size_t hw1_transform_w, hw1_transform_b, hw1_gate_w, hw1_gate_b;
    std::size_t hw2_transform_w, hw2_transform_b, hw2_gate_w, hw2_gate_b;
    std::size_t category_w, category_b, intent_w, intent_b;
  };
  const Slots& slots() const noexcept { return slots_; }

 private:
  std::vector<AttentionHead> attention_heads() const;
  HighwayParams highway_params(int which) const;

  ModelConfig config_;
  Vocabulary vocab_;
  numerics::ParamStore params_;
  Slots slots_{};
};

// Per-example loss terms and the matching logit gradients.
struct ExampleLoss {
  double focal = 0.0;
  double intent = 0.0;
  double total = 0.0;
  Matrix grad_category_logits;
  Matrix grad_intent_logits;
};

// Category targets are masked out for non-commercial examples.
ExampleLoss example_loss(const ModelConfig& config, const ForwardTrace& trace,
                         corpus::Intent intent, const std::vector<corpus::CategoryId>& categories);

}  // namespace jointmap::model
