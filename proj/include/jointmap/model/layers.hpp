#pragma once

#include <span>
#include <vector>

#include "jointmap/numerics/matrix.hpp"
#include "jointmap/numerics/random.hpp"

// Building blocks of the JointMap network, each with an explicit backward
// rule.
namespace jointmap::model {

using numerics::Matrix;

// Label-word compatibility: out(l, j) = cos(labels_l, words_j). Zero rows
// (padding) give zero similarity.
Matrix compatibility(const Matrix& labels, const Matrix& words);

struct AttentionHead {
  const Matrix* query = nullptr;  // width x key_dim
  const Matrix* key = nullptr;
  const Matrix* value = nullptr;
};

struct HeadTrace {
  Matrix q, k, v;   // rows x key_dim
  Matrix weights;   // rows x rows, row-stochastic
};

struct AttentionTrace {
  Matrix input;
  std::vector<HeadTrace> heads;
  Matrix output;  // same shape as input
};

// Multi-head scaled dot-product self-attention over the rows of `input`.
// Head i computes softmax(Q_i K_i^T / sqrt(d_k)) V_i with Q_i, K_i, V_i the
// input projected by the head's matrices; head outputs are concatenated
// along the width, so the output has the input's shape.
AttentionTrace multihead_attention(const Matrix& input, std::span<const AttentionHead> heads);

struct HeadGrads {
  Matrix query, key, value;
};

struct AttentionGrads {
  Matrix input;
  std::vector<HeadGrads> heads;
};

AttentionGrads multihead_attention_backward(const AttentionTrace& trace,
                                            std::span<const AttentionHead> heads,
                                            const Matrix& grad_output);

struct AttentionSplit {
  Matrix categories;  // first rows
  Matrix intents;     // remaining rows
};

AttentionSplit split_attention(const Matrix& attention, std::size_t category_rows);

struct HighwayParams {
  const Matrix* transform_w = nullptr;  // width x width
  const Matrix* transform_b = nullptr;  // 1 x width
  const Matrix* gate_w = nullptr;
  const Matrix* gate_b = nullptr;
};

struct HighwayTrace {
  Matrix input;
  Matrix transform_pre;  // x W_H + b_H
  Matrix transform;      // relu, after dropout
  Matrix dropout_mask;
  Matrix gate;           // sigmoid(x W_T + b_T)
  Matrix output;         // gate * transform + (1 - gate) * input
};

HighwayTrace highway(const HighwayParams& params, const Matrix& input, double dropout,
                     bool training, numerics::Rng* rng);

struct HighwayGrads {
  Matrix input, transform_w, transform_b, gate_w, gate_b;
};

HighwayGrads highway_backward(const HighwayParams& params, const HighwayTrace& trace,
                              const Matrix& grad_output);

struct PoolTrace {
  std::vector<std::size_t> argmax_label;  // per word position
  Matrix word_weights;                    // 1 x n softmax over real positions
  Matrix weighted_words;                  // diag(word_weights) * words
  Matrix pooled;                          // 1 x width
};

// Scores each word position by its strongest label attention, softmaxes the
// scores over real (unpadded) positions and returns the weighted sum of the
// rows of `words`. Throws InputError if every position is padding.
PoolTrace pool_representation(const Matrix& label_attention, const Matrix& words,
                              std::span<const bool> real_positions);

struct PoolGrads {
  Matrix label_attention;
  Matrix words;
};

PoolGrads pool_representation_backward(const PoolTrace& trace, const Matrix& label_attention,
                                       const Matrix& words, std::span<const bool> real_positions,
                                       const Matrix& grad_pooled);

}  // namespace jointmap::model
