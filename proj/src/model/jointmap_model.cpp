#include "jointmap/model/jointmap_model.hpp"

#include <cmath>
#include <fstream>
#include <iterator>
#include <memory>
#include <sstream>

#include "jointmap/error.hpp"
#include "jointmap/model/losses.hpp"
#include "jointmap/numerics/ops.hpp"

namespace jointmap::model {

using numerics::Rng;

namespace {

Matrix normal_matrix(std::size_t rows, std::size_t cols, double scale, Rng& rng) {
  Matrix m(rows, cols);
  for (double& x : m.values()) x = scale * rng.normal();
  return m;
}

Matrix xavier_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
  Matrix m(rows, cols);
  for (double& x : m.values()) x = rng.uniform(-bound, bound);
  return m;
}

Matrix affine(const Matrix& x, const Matrix& w, const Matrix& b) {
  Matrix out = numerics::matmul(x, w);
  numerics::add_row_broadcast(out, b);
  return out;
}

}  // namespace

JointMapModel::JointMapModel(ModelConfig config, Vocabulary vocabulary, Rng& init_rng)
    : config_(std::move(config)), vocab_(std::move(vocabulary)) {
  if (config_.vocab_size == 0) config_.vocab_size = vocab_.size();
  if (config_.vocab_size != vocab_.size()) {
    throw ConfigError("config vocab size " + std::to_string(config_.vocab_size) +
                      " differs from vocabulary size " + std::to_string(vocab_.size()));
  }
  config_.validate();
  const std::size_t v = config_.embedding_dim;
  const std::size_t n = config_.query_length;
  const std::size_t dk = config_.key_dim();
  const double scale = config_.embedding_init_scale;

  slots_.word_embedding = params_.add("word_embedding", normal_matrix(vocab_.size(), v, scale, init_rng));
  slots_.category_embedding =
      params_.add("category_embedding", normal_matrix(config_.categories, v, scale, init_rng));
  slots_.intent_embedding =
      params_.add("intent_embedding", normal_matrix(config_.intents, v, scale, init_rng));
  for (std::size_t h = 0; h < config_.heads; ++h) {
    const std::string prefix = "head" + std::to_string(h) + ".";
    slots_.head_query.push_back(params_.add(prefix + "query", xavier_matrix(n, dk, init_rng)));
    slots_.head_key.push_back(params_.add(prefix + "key", xavier_matrix(n, dk, init_rng)));
    slots_.head_value.push_back(params_.add(prefix + "value", xavier_matrix(n, dk, init_rng)));
  }
  const auto add_highway = [&](const std::string& prefix, std::size_t& tw, std::size_t& tb,
                               std::size_t& gw, std::size_t& gb) {
    tw = params_.add(prefix + ".transform_w", xavier_matrix(v, v, init_rng));
    tb = params_.add(prefix + ".transform_b", Matrix(1, v));
    gw = params_.add(prefix + ".gate_w", xavier_matrix(v, v, init_rng));
    gb = params_.add(prefix + ".gate_b", Matrix(1, v, config_.gate_bias_init));
  };
  add_highway("hw1", slots_.hw1_transform_w, slots_.hw1_transform_b, slots_.hw1_gate_w,
              slots_.hw1_gate_b);
  add_highway("hw2", slots_.hw2_transform_w, slots_.hw2_transform_b, slots_.hw2_gate_w,
              slots_.hw2_gate_b);
  slots_.category_w = params_.add("category_w", xavier_matrix(v, config_.categories, init_rng));
  slots_.category_b = params_.add("category_b", Matrix(1, config_.categories));
  slots_.intent_w = params_.add("intent_w", xavier_matrix(v, config_.intents, init_rng));
  slots_.intent_b = params_.add("intent_b", Matrix(1, config_.intents));
}

std::vector<std::size_t> JointMapModel::token_ids(const std::vector<std::string>& tokens) const {
  if (tokens.empty()) throw InputError("cannot embed an empty query");
  const std::size_t n = std::min(tokens.size(), config_.query_length);
  std::vector<std::size_t> ids(n);
  for (std::size_t i = 0; i < n; ++i) ids[i] = vocab_.id(tokens[i]);
  return ids;
}

Matrix JointMapModel::embed_query(const std::vector<std::string>& tokens) const {
  const auto ids = token_ids(tokens);
  const Matrix& table = params_[slots_.word_embedding].value;
  Matrix out(config_.query_length, config_.embedding_dim);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const auto src = table.row(ids[i]);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

Matrix JointMapModel::label_matrix() const {
  const Matrix& c = params_[slots_.category_embedding].value;
  const Matrix& u = params_[slots_.intent_embedding].value;
  Matrix out(c.rows() + u.rows(), config_.embedding_dim);
  for (std::size_t r = 0; r < c.rows(); ++r) std::copy(c.row(r).begin(), c.row(r).end(), out.row(r).begin());
  for (std::size_t r = 0; r < u.rows(); ++r) {
    std::copy(u.row(r).begin(), u.row(r).end(), out.row(c.rows() + r).begin());
  }
  return out;
}

std::vector<AttentionHead> JointMapModel::attention_heads() const {
  std::vector<AttentionHead> heads;
  for (std::size_t h = 0; h < config_.heads; ++h) {
    heads.push_back({&params_[slots_.head_query[h]].value, &params_[slots_.head_key[h]].value,
                     &params_[slots_.head_value[h]].value});
  }
  return heads;
}

HighwayParams JointMapModel::highway_params(int which) const {
  if (which == 1) {
    return {&params_[slots_.hw1_transform_w].value, &params_[slots_.hw1_transform_b].value,
            &params_[slots_.hw1_gate_w].value, &params_[slots_.hw1_gate_b].value};
  }
  return {&params_[slots_.hw2_transform_w].value, &params_[slots_.hw2_transform_b].value,
          &params_[slots_.hw2_gate_w].value, &params_[slots_.hw2_gate_b].value};
}

ForwardTrace JointMapModel::forward(const std::vector<std::string>& tokens, bool training,
                                    Rng* rng) const {
  if (training && config_.dropout > 0.0 && rng == nullptr) {
    throw ConfigError("training forward pass requires a generator");
  }
  ForwardTrace t;
  t.token_ids = token_ids(tokens);
  t.real_positions.assign(config_.query_length, false);
  for (std::size_t i = 0; i < t.token_ids.size(); ++i) t.real_positions[i] = true;
  t.words = embed_query(tokens);
  t.labels = label_matrix();
  t.compatibility = compatibility(t.labels, t.words);
  const auto heads = attention_heads();
  t.attention = multihead_attention(t.compatibility, heads);
  t.split = split_attention(t.attention.output, config_.categories);

  const double p = config_.dropout;
  t.highway_category = highway(highway_params(1), t.words, p, training, rng);
  t.highway_intent = highway(highway_params(2), t.words, p, training, rng);

  // std::vector<bool> has no contiguous storage.
  const std::unique_ptr<bool[]> real(new bool[config_.query_length]);
  for (std::size_t i = 0; i < config_.query_length; ++i) real[i] = t.real_positions[i];
  const std::span<const bool> mask(real.get(), config_.query_length);
  t.pool_category = pool_representation(t.split.categories, t.highway_category.output, mask);
  t.pool_intent = pool_representation(t.split.intents, t.highway_intent.output, mask);

  t.z_category = numerics::dropout(t.pool_category.pooled, p, training, rng, &t.z_category_mask);
  t.z_intent = numerics::dropout(t.pool_intent.pooled, p, training, rng, &t.z_intent_mask);
  t.category_logits =
      affine(t.z_category, params_[slots_.category_w].value, params_[slots_.category_b].value);
  t.intent_logits =
      affine(t.z_intent, params_[slots_.intent_w].value, params_[slots_.intent_b].value);
  return t;
}

void JointMapModel::backward(const ForwardTrace& t, const Matrix& grad_category_logits,
                             const Matrix& grad_intent_logits,
                             numerics::GradBuffer& grads) const {
  using numerics::matmul_nt;
  using numerics::matmul_tn;
  if (!grad_category_logits.same_shape(t.category_logits) ||
      !grad_intent_logits.same_shape(t.intent_logits)) {
    throw ShapeError("logit gradients do not match the trace");
  }
  if (grads.size() != params_.size()) throw ShapeError("gradient buffer does not match the model");

  // Output heads.
  grads[slots_.category_w] += matmul_tn(t.z_category, grad_category_logits);
  grads[slots_.category_b] += grad_category_logits;
  grads[slots_.intent_w] += matmul_tn(t.z_intent, grad_intent_logits);
  grads[slots_.intent_b] += grad_intent_logits;
  Matrix dz_category = matmul_nt(grad_category_logits, params_[slots_.category_w].value);
  Matrix dz_intent = matmul_nt(grad_intent_logits, params_[slots_.intent_w].value);
  for (std::size_t i = 0; i < dz_category.size(); ++i) {
    dz_category.values()[i] *= t.z_category_mask.values()[i];
    dz_intent.values()[i] *= t.z_intent_mask.values()[i];
  }

  // Pooling.
  const std::unique_ptr<bool[]> real(new bool[config_.query_length]);
  for (std::size_t i = 0; i < config_.query_length; ++i) real[i] = t.real_positions[i];
  const std::span<const bool> mask(real.get(), config_.query_length);
  const PoolGrads pc = pool_representation_backward(t.pool_category, t.split.categories,
                                                    t.highway_category.output, mask, dz_category);
  const PoolGrads pi = pool_representation_backward(t.pool_intent, t.split.intents,
                                                    t.highway_intent.output, mask, dz_intent);

  // Highways.
  Matrix d_words(config_.query_length, config_.embedding_dim);
  const auto add_highway = [&](int which, const HighwayTrace& trace, const Matrix& g,
                               std::size_t tw, std::size_t tb, std::size_t gw, std::size_t gb) {
    HighwayGrads hg = highway_backward(highway_params(which), trace, g);
    grads[tw] += hg.transform_w;
    grads[tb] += hg.transform_b;
    grads[gw] += hg.gate_w;
    grads[gb] += hg.gate_b;
    d_words += hg.input;
  };
  add_highway(1, t.highway_category, pc.words, slots_.hw1_transform_w, slots_.hw1_transform_b,
              slots_.hw1_gate_w, slots_.hw1_gate_b);
  add_highway(2, t.highway_intent, pi.words, slots_.hw2_transform_w, slots_.hw2_transform_b,
              slots_.hw2_gate_w, slots_.hw2_gate_b);

  // Attention.
  const std::size_t c = config_.categories;
  Matrix d_attention(t.attention.output.rows(), t.attention.output.cols());
  for (std::size_t r = 0; r < c; ++r) {
    std::copy(pc.label_attention.row(r).begin(), pc.label_attention.row(r).end(),
              d_attention.row(r).begin());
  }
  for (std::size_t r = 0; r < pi.label_attention.rows(); ++r) {
    std::copy(pi.label_attention.row(r).begin(), pi.label_attention.row(r).end(),
              d_attention.row(c + r).begin());
  }
  const auto heads = attention_heads();
  const AttentionGrads ag = multihead_attention_backward(t.attention, heads, d_attention);
  for (std::size_t h = 0; h < config_.heads; ++h) {
    grads[slots_.head_query[h]] += ag.heads[h].query;
    grads[slots_.head_key[h]] += ag.heads[h].key;
    grads[slots_.head_value[h]] += ag.heads[h].value;
  }

  // Compatibility.
  const numerics::CosineGrads cg =
      numerics::cosine_rows_backward(t.labels, t.words, t.compatibility, ag.input);
  d_words += cg.grad_b;
  Matrix& d_cat = grads[slots_.category_embedding];
  Matrix& d_int = grads[slots_.intent_embedding];
  for (std::size_t r = 0; r < c; ++r) {
    for (std::size_t k = 0; k < config_.embedding_dim; ++k) d_cat(r, k) += cg.grad_a(r, k);
  }
  for (std::size_t r = 0; r < config_.intents; ++r) {
    for (std::size_t k = 0; k < config_.embedding_dim; ++k) d_int(r, k) += cg.grad_a(c + r, k);
  }

  // Embedding rows of real positions only; padding is a constant zero row.
  Matrix& d_table = grads[slots_.word_embedding];
  for (std::size_t i = 0; i < t.token_ids.size(); ++i) {
    for (std::size_t k = 0; k < config_.embedding_dim; ++k) {
      d_table(t.token_ids[i], k) += d_words(i, k);
    }
  }
}

Prediction JointMapModel::predict(const std::vector<std::string>& tokens,
                                  double category_threshold) const {
  const ForwardTrace t = forward(tokens, false, nullptr);
  Prediction p;
  const double s0 = t.intent_logits(0, 0);
  const double s1 = t.intent_logits(0, 1);
  p.commercial_probability = numerics::sigmoid(s0 - s1);
  p.intent = s0 >= s1 ? corpus::Intent::kCommercial : corpus::Intent::kNonCommercial;
  p.category_probabilities.resize(config_.categories);
  for (std::size_t c = 0; c < config_.categories; ++c) {
    p.category_probabilities[c] = numerics::sigmoid(t.category_logits(0, c));
    if (p.intent == corpus::Intent::kCommercial && p.category_probabilities[c] > category_threshold) {
      p.categories.push_back(static_cast<corpus::CategoryId>(c));
    }
  }
  return p;
}

std::size_t JointMapModel::load_word_vectors(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FileError("cannot open word vectors '" + path.string() + "'");
  Matrix& table = params_[slots_.word_embedding].value;
  std::size_t loaded = 0;
  std::size_t line_no = 0;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream fields_in(line);
    std::vector<std::string> fields{std::istream_iterator<std::string>(fields_in),
                                    std::istream_iterator<std::string>()};
    if (fields.empty()) continue;
    if (fields.size() != config_.embedding_dim + 1) {
      throw ParseError(path.string(), line_no,
                       "expected " + std::to_string(config_.embedding_dim) + " components");
    }
    const auto row = vocab_.find(fields[0]);
    if (!row) continue;
    for (std::size_t k = 0; k < config_.embedding_dim; ++k) {
      try {
        std::size_t used = 0;
        table(*row, k) = std::stod(fields[k + 1], &used);
        if (used != fields[k + 1].size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        throw ParseError(path.string(), line_no, "bad number '" + fields[k + 1] + "'");
      }
    }
    ++loaded;
  }
  return loaded;
}

ExampleLoss example_loss(const ModelConfig& config, const ForwardTrace& trace,
                         corpus::Intent intent, const std::vector<corpus::CategoryId>& categories) {
  ExampleLoss out;
  const auto intent_logits = trace.intent_logits.row(0);
  const std::size_t target = intent_index(intent);
  out.intent = loss_intent(intent_logits, target);
  out.grad_intent_logits = Matrix::row_vector(loss_intent_grad(intent_logits, target));
  out.grad_intent_logits *= config.beta_intent;
  out.grad_category_logits = Matrix(1, config.categories);
  if (intent == corpus::Intent::kCommercial) {
    std::vector<double> targets(config.categories, 0.0);
    for (corpus::CategoryId c : categories) {
      if (c < 0 || static_cast<std::size_t>(c) >= config.categories) {
        throw InputError("category id " + std::to_string(c) + " outside the model's " +
                         std::to_string(config.categories) + " categories");
      }
      targets[static_cast<std::size_t>(c)] = 1.0;
    }
    std::vector<double> alpha;
    if (!config.focal_alpha.empty()) alpha = config.focal_alpha;
    const auto logits = trace.category_logits.row(0);
    out.focal = focal_loss_pc(logits, targets, config.focal_gamma, alpha);
    out.grad_category_logits =
        Matrix::row_vector(focal_loss_pc_grad(logits, targets, config.focal_gamma, alpha));
    out.grad_category_logits *= config.beta_category;
  }
  out.total = config.beta_category * out.focal + config.beta_intent * out.intent;
  return out;
}

}  // namespace jointmap::model
