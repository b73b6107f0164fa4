#pragma once

#include <vector>

#include "jointmap/baseline/svm.hpp"
#include "jointmap/baseline/tfidf.hpp"
#include "jointmap/datasets/labeled_dataset.hpp"
#include "jointmap/numerics/random.hpp"

namespace jointmap::datasets {

struct KnnExpandOptions {
  std::size_t k = 5;
  double agreement = 0.8;
};

// Labels each pool query whose k nearest labeled neighbours (cosine
// distance in tf*idf space) agree on one intent with at least the given
// fraction. Neighbours sharing no term do not count, so a query with fewer
// than k similar labeled queries stays in the pool. Returns `labeled` plus
// the newly labeled records, tagged kKnn.
LabeledDataset knn_expand(const LabeledDataset& labeled, const std::vector<PoolQuery>& pool,
                          const baseline::TfIdfVectorizer& vectorizer,
                          const KnnExpandOptions& options = {});
// Same, fitting the vectorizer on labeled and pool text.
LabeledDataset knn_expand(const LabeledDataset& labeled, const std::vector<PoolQuery>& pool,
                          const KnnExpandOptions& options = {});

struct ScoredQuery {
  QueryId id = 0;
  double margin = 0.0;
};

// Ids with |margin| < tau, closest to the decision boundary first (ties by
// id).
std::vector<QueryId> find_tricky_samples(const std::vector<ScoredQuery>& scores, double tau);

struct Algorithm1Options {
  KnnExpandOptions knn;
  double tau = 0.25;
  double stop_threshold = 0.95;
  int max_iters = 10;
  // Upper bound on oracle relabels per iteration.
  std::size_t relabel_budget = 100;
  // Non-commercial fraction the scorer's training set is oversampled to; 0
  // trains on the labeled set as is.
  double scorer_balance = 0.5;
  baseline::SvmOptions svm;
};

struct ActiveLearningState {
  LabeledDataset labeled;
  LabeledDataset test;
  int iteration = 0;
  std::vector<double> accuracy_history;
  std::vector<std::size_t> labeled_size_history;
  std::vector<std::vector<QueryId>> tricky_history;
  double tau = 0.25;
  double stop_threshold = 0.95;
  bool converged = false;
};

struct SeedSplit {
  LabeledDataset seed;
  LabeledDataset test;
  std::vector<PoolQuery> pool;
};

// Draws an oracle-labeled seed set and a disjoint held-out test set with up
// to the given number of queries per intent; the rest becomes the pool.
SeedSplit carve_seed_and_test(const std::vector<corpus::Query>& queries,
                              const corpus::Oracle& oracle, std::size_t seed_per_class,
                              std::size_t test_per_class, numerics::Rng& rng);

// Distant supervision with active learning for intent labels. Iterates
// expand -> train scorer -> find tricky samples -> oracle relabel -> held-out
// accuracy until the accuracy reaches the stop threshold or max_iters runs
// out (converged = false, not an error). Throws ConfigError if the seed set
// lacks either intent.
ActiveLearningState algorithm1_run(const LabeledDataset& seed, const std::vector<PoolQuery>& pool,
                                   const LabeledDataset& test, const corpus::Oracle& oracle,
                                   const Algorithm1Options& options, numerics::Rng& rng);

}  // namespace jointmap::datasets
