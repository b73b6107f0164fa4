#pragma once

// Desk-scale experiment harness: a synthetic corpus with gold labels split
// 70/10/20, non-commercial training records oversampled to half, and
// JointMap or the tf*idf SVM trained and scored on the held-out split.

#include <cstdint>
#include <map>
#include <vector>

#include "jointmap/corpus/corpus.hpp"
#include "jointmap/eval/metrics.hpp"
#include "jointmap/model/training.hpp"

namespace desk {

struct Data {
  std::vector<jointmap::model::TrainExample> train;
  std::vector<jointmap::model::TrainExample> val;
  std::vector<jointmap::model::TrainExample> test;
  // Commercial training records per category, before oversampling.
  std::map<int, std::size_t> category_support;
  std::vector<int> categories;
  std::uint64_t seed = 0;
  // Generator state after oversampling; every run of a seed starts here.
  jointmap::numerics::Rng train_rng{0};
};

Data make_data(std::uint64_t seed, double skew_exponent);

struct Scores {
  jointmap::eval::PerClassCounts intent;
  jointmap::eval::PerClassCounts category;
  double seconds = 0.0;

  double intent_macro() const { return jointmap::eval::f1_macro(intent); }
  double category_macro() const { return jointmap::eval::f1_macro(category); }
};

// Embedding width of the desk runs.
constexpr std::size_t kEmbeddingDim = 64;

jointmap::model::ModelConfig default_model_config(const Data& data);

// 30 epochs, batch 64, lr 1e-3, one thread.
Scores train_jointmap(const Data& data, const jointmap::model::ModelConfig& config);
Scores train_baseline(const Data& data);

}  // namespace desk
