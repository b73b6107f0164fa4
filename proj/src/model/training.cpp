#include "jointmap/model/training.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <thread>

#include "jointmap/error.hpp"
#include "jointmap/numerics/ops.hpp"

namespace jointmap::model {

namespace {

// Gradients are reduced over this many fixed chunks of a batch, in order,
// so the result does not depend on the thread count.
constexpr std::size_t kChunks = 4;

std::vector<int> all_categories(const ModelConfig& config) {
  std::vector<int> classes(config.categories);
  std::iota(classes.begin(), classes.end(), 0);
  return classes;
}

}  // namespace

TaskScores evaluate(const JointMapModel& model, const std::vector<TrainExample>& examples) {
  const ModelConfig& config = model.config();
  std::vector<int> intent_pred, intent_gold;
  std::vector<std::vector<int>> cat_pred, cat_gold;
  for (const auto& ex : examples) {
    const Prediction p = model.predict(ex.tokens);
    intent_pred.push_back(static_cast<int>(intent_index(p.intent)));
    intent_gold.push_back(static_cast<int>(intent_index(ex.intent)));
    if (ex.intent != corpus::Intent::kCommercial) continue;
    std::vector<int> predicted;
    for (std::size_t c = 0; c < config.categories; ++c) {
      if (p.category_probabilities[c] > config.category_threshold) {
        predicted.push_back(static_cast<int>(c));
      }
    }
    cat_pred.push_back(std::move(predicted));
    cat_gold.push_back(ex.categories);
  }
  return {eval::count(intent_pred, intent_gold, {0, 1}),
          eval::count(cat_pred, cat_gold, all_categories(config))};
}

double batch_loss(const JointMapModel& model, std::span<const TrainExample> batch, bool training,
                  std::uint64_t rng_seed, numerics::GradBuffer* grads, std::size_t threads) {
  if (batch.empty()) return 0.0;
  const double inv = 1.0 / static_cast<double>(batch.size());
  const std::size_t chunks = std::min(kChunks, batch.size());
  std::vector<double> chunk_loss(chunks, 0.0);
  std::vector<numerics::GradBuffer> chunk_grads;
  if (grads) chunk_grads.assign(chunks, model.params().make_grad_buffer());

  const auto run_chunk = [&](std::size_t k) {
    const std::size_t begin = k * batch.size() / chunks;
    const std::size_t end = (k + 1) * batch.size() / chunks;
    for (std::size_t i = begin; i < end; ++i) {
      numerics::Rng rng(numerics::Rng::mix(rng_seed ^ numerics::Rng::mix(i)));
      const ForwardTrace trace = model.forward(batch[i].tokens, training, &rng);
      ExampleLoss loss = example_loss(model.config(), trace, batch[i].intent, batch[i].categories);
      chunk_loss[k] += loss.total;
      if (grads) {
        loss.grad_category_logits *= inv;
        loss.grad_intent_logits *= inv;
        model.backward(trace, loss.grad_category_logits, loss.grad_intent_logits, chunk_grads[k]);
      }
    }
  };

  const std::size_t workers = std::clamp<std::size_t>(threads, 1, chunks);
  if (workers == 1) {
    for (std::size_t k = 0; k < chunks; ++k) run_chunk(k);
  } else {
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t k = w; k < chunks; k += workers) run_chunk(k);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  double total = 0.0;
  for (std::size_t k = 0; k < chunks; ++k) {
    total += chunk_loss[k];
    if (grads) *grads += chunk_grads[k];
  }
  return total * inv;
}

TrainingReport train(JointMapModel& model, const std::vector<TrainExample>& train_set,
                     const std::vector<TrainExample>& val_set, const TrainOptions& options,
                     numerics::Rng& rng, const std::function<void(const EpochReport&)>& on_epoch) {
  if (train_set.empty()) throw ConfigError("training split is empty");
  if (options.epochs < 0) throw ConfigError("epoch count must be >= 0");
  if (options.batch_size == 0) throw ConfigError("batch size must be >= 1");
  if (!(options.learning_rate >= 0.0)) throw ConfigError("learning rate must be >= 0");

  auto& params = model.params();
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<TrainExample> batch;
  batch.reserve(options.batch_size);

  TrainingReport report;
  double best_score = -1.0;
  std::vector<numerics::Matrix> best_values;
  for (int epoch = 1; epoch <= options.epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += options.batch_size) {
      const std::size_t end = std::min(order.size(), start + options.batch_size);
      batch.clear();
      for (std::size_t i = start; i < end; ++i) batch.push_back(train_set[order[i]]);
      auto grads = params.make_grad_buffer();
      const double loss = batch_loss(model, batch, true, rng.next(), &grads, options.threads);
      loss_sum += loss * static_cast<double>(batch.size());
      params.zero_grad();
      params.accumulate(grads);
      numerics::adam_step(params, options.learning_rate);
    }

    EpochReport e;
    e.epoch = epoch;
    e.train_loss = loss_sum / static_cast<double>(train_set.size());
    if (!val_set.empty()) {
      const TaskScores scores = evaluate(model, val_set);
      e.val_macro_f1_intent = eval::f1_macro(scores.intent);
      e.val_macro_f1_category = eval::f1_macro(scores.category);
    }
    report.epochs.push_back(e);
    if (on_epoch) on_epoch(e);

    const double score = e.val_macro_f1_intent + e.val_macro_f1_category;
    if (score > best_score) {
      best_score = score;
      report.best_epoch = epoch;
      if (options.keep_best && !val_set.empty()) {
        best_values.clear();
        for (const auto& p : params) best_values.push_back(p.value);
      }
    }
  }
  if (val_set.empty()) report.best_epoch = options.epochs;
  if (options.keep_best && !best_values.empty()) {
    for (std::size_t i = 0; i < params.size(); ++i) params[i].value = best_values[i];
  }
  return report;
}

std::string to_json_line(const EpochReport& e) {
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "{\"epoch\":%d,\"train_loss\":%.17g,\"val_macro_f1_intent\":%.17g,"
                "\"val_macro_f1_category\":%.17g}",
                e.epoch, e.train_loss, e.val_macro_f1_intent, e.val_macro_f1_category);
  return buf;
}

}  // namespace jointmap::model
