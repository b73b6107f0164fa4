#pragma once

#include <functional>
#include <vector>

#include "jointmap/corpus/corpus.hpp"
#include "jointmap/eval/metrics.hpp"
#include "jointmap/model/jointmap_model.hpp"

namespace jointmap::model {

struct TrainExample {
  std::vector<std::string> tokens;
  corpus::Intent intent = corpus::Intent::kCommercial;
  std::vector<corpus::CategoryId> categories;
};

struct TrainOptions {
  int epochs = 30;
  std::size_t batch_size = 64;
  double learning_rate = 1e-3;
  std::size_t threads = 1;
  // Restore the parameters of the epoch with the best validation score.
  bool keep_best = true;
};

struct EpochReport {
  int epoch = 0;
  double train_loss = 0.0;
  double val_macro_f1_intent = 0.0;
  double val_macro_f1_category = 0.0;
};

struct TrainingReport {
  std::vector<EpochReport> epochs;
  int best_epoch = 0;
};

struct TaskScores {
  eval::PerClassCounts intent;
  eval::PerClassCounts category;
};

// Intent counts over all examples; category counts over commercial-gold
// examples using the raw category head (not gated by predicted intent).
TaskScores evaluate(const JointMapModel& model, const std::vector<TrainExample>& examples);

// Mean total loss of a batch; adds the averaged gradients into `grads` when
// non-null. Dropout randomness for example i comes from rng_seed and i.
double batch_loss(const JointMapModel& model, std::span<const TrainExample> batch, bool training,
                  std::uint64_t rng_seed, numerics::GradBuffer* grads, std::size_t threads = 1);

// Minibatch Adam training, deterministic under the generator's seed for a
// fixed thread count. Throws ConfigError for an empty training set.
TrainingReport train(JointMapModel& model, const std::vector<TrainExample>& train_set,
                     const std::vector<TrainExample>& val_set, const TrainOptions& options,
                     numerics::Rng& rng,
                     const std::function<void(const EpochReport&)>& on_epoch = {});

// {"epoch":..,"train_loss":..,"val_macro_f1_intent":..,"val_macro_f1_category":..}
std::string to_json_line(const EpochReport& e);

}  // namespace jointmap::model
