#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "jointmap/baseline/sparse.hpp"
#include "jointmap/numerics/random.hpp"

namespace jointmap::baseline {

struct SvmOptions {
  double lambda = 1e-4;
  int epochs = 20;
};

// Linear binary classifier; margin = w . x + b.
struct BinarySvm {
  std::vector<double> weights;
  double bias = 0.0;

  // Throws ShapeError if x has an index outside the weight vector.
  double decision(const SparseVector& x) const;
};

struct SvmTrainLog {
  // L2-regularized mean hinge objective evaluated after every epoch.
  std::vector<double> objective;
};

// Pegasos stochastic subgradient descent on
//   lambda/2 * (|w|^2 + b^2) + mean_i max(0, 1 - y_i (w . x_i + b)).
// Labels are +1 / -1. Throws ConfigError when only one label is present.
BinarySvm train_binary_svm(std::span<const SparseVector> features, std::span<const int> labels,
                           std::size_t dimension, const SvmOptions& options, numerics::Rng& rng,
                           SvmTrainLog* log = nullptr);

double svm_objective(const BinarySvm& model, std::span<const SparseVector> features,
                     std::span<const int> labels, double lambda);

// One binary classifier per class. For multi-label data a record is a
// positive for every class in its label set.
struct OneVsRestSvm {
  std::vector<int> classes;
  std::vector<BinarySvm> models;
  std::size_t dimension = 0;

  // Raw affine margins, one per entry of `classes`.
  std::vector<double> decision(const SparseVector& x) const;
  // Index into `classes` of the largest margin.
  int predict_single(const SparseVector& x) const;
  // Classes whose margin exceeds the threshold.
  std::vector<int> predict_multi(const SparseVector& x, double threshold = 0.0) const;
};

// Throws ConfigError if a class has no positive or no negative example.
OneVsRestSvm train_one_vs_rest(std::span<const SparseVector> features,
                               const std::vector<std::vector<int>>& label_sets,
                               const std::vector<int>& classes, std::size_t dimension,
                               const SvmOptions& options, numerics::Rng& rng);

}  // namespace jointmap::baseline
