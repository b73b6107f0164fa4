#include "jointmap/model/layers.hpp"

#include <cmath>
#include <limits>

#include "jointmap/error.hpp"
#include "jointmap/numerics/ops.hpp"

namespace jointmap::model {

using numerics::matmul;
using numerics::matmul_nt;
using numerics::matmul_tn;

namespace {

Matrix column_block(const Matrix& m, std::size_t begin, std::size_t width) {
  Matrix out(m.rows(), width);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < width; ++c) out(r, c) = m(r, begin + c);
  }
  return out;
}

void check_head(const AttentionHead& head, std::size_t width) {
  if (!head.query || !head.key || !head.value) throw ConfigError("attention head is unset");
  const std::size_t dk = head.query->cols();
  for (const Matrix* p : {head.query, head.key, head.value}) {
    if (p->rows() != width || p->cols() != dk) {
      throw ShapeError("attention projection " + p->shape_string() + " does not fit input width " +
                       std::to_string(width));
    }
  }
}

}  // namespace

Matrix compatibility(const Matrix& labels, const Matrix& words) {
  return numerics::cosine_rows(labels, words);
}

AttentionTrace multihead_attention(const Matrix& input, std::span<const AttentionHead> heads) {
  if (heads.empty()) throw ConfigError("attention needs at least one head");
  const std::size_t width = input.cols();
  std::size_t total = 0;
  for (const auto& h : heads) {
    check_head(h, width);
    total += h.query->cols();
  }
  if (total != width) {
    throw ShapeError("head widths sum to " + std::to_string(total) + ", input width is " +
                     std::to_string(width));
  }

  AttentionTrace trace;
  trace.input = input;
  trace.output = Matrix(input.rows(), width);
  std::size_t offset = 0;
  for (const auto& h : heads) {
    HeadTrace ht;
    ht.q = matmul(input, *h.query);
    ht.k = matmul(input, *h.key);
    ht.v = matmul(input, *h.value);
    const double scale = 1.0 / std::sqrt(static_cast<double>(ht.q.cols()));
    Matrix scores = matmul_nt(ht.q, ht.k);
    scores *= scale;
    ht.weights = numerics::row_softmax(scores);
    const Matrix out = matmul(ht.weights, ht.v);
    for (std::size_t r = 0; r < out.rows(); ++r) {
      for (std::size_t c = 0; c < out.cols(); ++c) trace.output(r, offset + c) = out(r, c);
    }
    offset += out.cols();
    trace.heads.push_back(std::move(ht));
  }
  return trace;
}

AttentionGrads multihead_attention_backward(const AttentionTrace& trace,
                                            std::span<const AttentionHead> heads,
                                            const Matrix& grad_output) {
  if (!grad_output.same_shape(trace.output)) {
    throw ShapeError("attention gradient " + grad_output.shape_string() + " vs output " +
                     trace.output.shape_string());
  }
  if (heads.size() != trace.heads.size()) throw ShapeError("head count differs from trace");
  AttentionGrads grads;
  grads.input = Matrix(trace.input.rows(), trace.input.cols());
  std::size_t offset = 0;
  for (std::size_t i = 0; i < heads.size(); ++i) {
    const HeadTrace& ht = trace.heads[i];
    const std::size_t dk = ht.q.cols();
    const double scale = 1.0 / std::sqrt(static_cast<double>(dk));
    const Matrix d_out = column_block(grad_output, offset, dk);
    offset += dk;

    const Matrix d_weights = matmul_nt(d_out, ht.v);
    const Matrix d_v = matmul_tn(ht.weights, d_out);
    Matrix d_scores = numerics::row_softmax_backward(ht.weights, d_weights);
    d_scores *= scale;
    const Matrix d_q = matmul(d_scores, ht.k);
    const Matrix d_k = matmul_tn(d_scores, ht.q);

    HeadGrads hg;
    hg.query = matmul_tn(trace.input, d_q);
    hg.key = matmul_tn(trace.input, d_k);
    hg.value = matmul_tn(trace.input, d_v);
    grads.input += matmul_nt(d_q, *heads[i].query);
    grads.input += matmul_nt(d_k, *heads[i].key);
    grads.input += matmul_nt(d_v, *heads[i].value);
    grads.heads.push_back(std::move(hg));
  }
  return grads;
}

AttentionSplit split_attention(const Matrix& attention, std::size_t category_rows) {
  if (category_rows > attention.rows()) {
    throw ShapeError("cannot split " + std::to_string(category_rows) + " category rows from " +
                     attention.shape_string());
  }
  return {attention.slice_rows(0, category_rows),
          attention.slice_rows(category_rows, attention.rows())};
}

HighwayTrace highway(const HighwayParams& params, const Matrix& input, double dropout,
                     bool training, numerics::Rng* rng) {
  if (!params.transform_w || !params.transform_b || !params.gate_w || !params.gate_b) {
    throw ConfigError("highway parameters are unset");
  }
  HighwayTrace t;
  t.input = input;
  t.transform_pre = matmul(input, *params.transform_w);
  numerics::add_row_broadcast(t.transform_pre, *params.transform_b);
  t.transform = numerics::dropout(numerics::relu(t.transform_pre), dropout, training, rng,
                                  &t.dropout_mask);
  Matrix gate_pre = matmul(input, *params.gate_w);
  numerics::add_row_broadcast(gate_pre, *params.gate_b);
  t.gate = numerics::sigmoid(gate_pre);
  if (!t.transform.same_shape(input)) {
    throw ShapeError("highway transform " + t.transform.shape_string() + " must match input " +
                     input.shape_string());
  }
  t.output = Matrix(input.rows(), input.cols());
  auto out = t.output.values();
  const auto x = input.values();
  const auto h = t.transform.values();
  const auto g = t.gate.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = g[i] * h[i] + (1.0 - g[i]) * x[i];
  return t;
}

HighwayGrads highway_backward(const HighwayParams& params, const HighwayTrace& trace,
                              const Matrix& grad_output) {
  if (!grad_output.same_shape(trace.output)) {
    throw ShapeError("highway gradient " + grad_output.shape_string() + " vs output " +
                     trace.output.shape_string());
  }
  const std::size_t n = grad_output.size();
  Matrix d_pre(trace.input.rows(), trace.input.cols());
  Matrix d_gate_pre(trace.input.rows(), trace.input.cols());
  Matrix d_input(trace.input.rows(), trace.input.cols());
  const auto g = trace.gate.values();
  const auto h = trace.transform.values();
  const auto x = trace.input.values();
  const auto pre = trace.transform_pre.values();
  const auto mask = trace.dropout_mask.values();
  const auto dy = grad_output.values();
  auto dp = d_pre.values();
  auto dg = d_gate_pre.values();
  auto dx = d_input.values();
  for (std::size_t i = 0; i < n; ++i) {
    dp[i] = pre[i] > 0.0 ? dy[i] * g[i] * mask[i] : 0.0;
    dg[i] = dy[i] * (h[i] - x[i]) * g[i] * (1.0 - g[i]);
    dx[i] = dy[i] * (1.0 - g[i]);
  }
  HighwayGrads grads;
  grads.transform_w = matmul_tn(trace.input, d_pre);
  grads.transform_b = numerics::column_sums(d_pre);
  grads.gate_w = matmul_tn(trace.input, d_gate_pre);
  grads.gate_b = numerics::column_sums(d_gate_pre);
  d_input += matmul_nt(d_pre, *params.transform_w);
  d_input += matmul_nt(d_gate_pre, *params.gate_w);
  grads.input = std::move(d_input);
  return grads;
}

PoolTrace pool_representation(const Matrix& label_attention, const Matrix& words,
                              std::span<const bool> real_positions) {
  const std::size_t n = label_attention.cols();
  if (words.rows() != n || real_positions.size() != n) {
    throw ShapeError("pooling over " + std::to_string(n) + " positions got words " +
                     words.shape_string() + " and " + std::to_string(real_positions.size()) +
                     " position flags");
  }
  if (label_attention.rows() == 0) throw ShapeError("pooling needs at least one label row");
  PoolTrace t;
  t.argmax_label.assign(n, 0);
  std::vector<double> score(n, 0.0);
  double peak = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < n; ++j) {
    std::size_t best = 0;
    for (std::size_t l = 1; l < label_attention.rows(); ++l) {
      if (label_attention(l, j) > label_attention(best, j)) best = l;
    }
    t.argmax_label[j] = best;
    score[j] = label_attention(best, j);
    if (real_positions[j]) peak = std::max(peak, score[j]);
  }
  if (peak == -std::numeric_limits<double>::infinity()) {
    throw InputError("pooling needs at least one real word position");
  }
  t.word_weights = Matrix(1, n);
  double z = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    if (real_positions[j]) z += (t.word_weights(0, j) = std::exp(score[j] - peak));
  }
  for (std::size_t j = 0; j < n; ++j) t.word_weights(0, j) /= z;

  t.weighted_words = Matrix(n, words.cols());
  t.pooled = Matrix(1, words.cols());
  for (std::size_t j = 0; j < n; ++j) {
    const double b = t.word_weights(0, j);
    for (std::size_t c = 0; c < words.cols(); ++c) {
      t.weighted_words(j, c) = b * words(j, c);
      t.pooled(0, c) += t.weighted_words(j, c);
    }
  }
  return t;
}

PoolGrads pool_representation_backward(const PoolTrace& trace, const Matrix& label_attention,
                                       const Matrix& words, std::span<const bool> real_positions,
                                       const Matrix& grad_pooled) {
  const std::size_t n = words.rows();
  if (grad_pooled.rows() != 1 || grad_pooled.cols() != words.cols()) {
    throw ShapeError("pooled gradient " + grad_pooled.shape_string() + " vs width " +
                     std::to_string(words.cols()));
  }
  PoolGrads grads;
  grads.words = Matrix(n, words.cols());
  grads.label_attention = Matrix(label_attention.rows(), label_attention.cols());
  std::vector<double> d_weight(n, 0.0);
  double mean = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    if (!real_positions[j]) continue;
    const double b = trace.word_weights(0, j);
    double dot = 0.0;
    for (std::size_t c = 0; c < words.cols(); ++c) {
      dot += grad_pooled(0, c) * words(j, c);
      grads.words(j, c) = b * grad_pooled(0, c);
    }
    d_weight[j] = dot;
    mean += b * dot;
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (!real_positions[j]) continue;
    const double b = trace.word_weights(0, j);
    grads.label_attention(trace.argmax_label[j], j) = b * (d_weight[j] - mean);
  }
  return grads;
}

}  // namespace jointmap::model
