#include "jointmap/baseline/svm.hpp"

#include <algorithm>
#include <numeric>

#include "jointmap/error.hpp"

namespace jointmap::baseline {

double BinarySvm::decision(const SparseVector& x) const {
  double s = bias;
  for (std::size_t i = 0; i < x.indices.size(); ++i) {
    if (x.indices[i] >= weights.size()) {
      throw ShapeError("feature index " + std::to_string(x.indices[i]) +
                       " outside model dimension " + std::to_string(weights.size()));
    }
    s += weights[x.indices[i]] * x.values[i];
  }
  return s;
}

double svm_objective(const BinarySvm& model, std::span<const SparseVector> features,
                     std::span<const int> labels, double lambda) {
  double norm2 = model.bias * model.bias;
  for (double w : model.weights) norm2 += w * w;
  double hinge = 0.0;
  for (std::size_t i = 0; i < features.size(); ++i) {
    hinge += std::max(0.0, 1.0 - labels[i] * model.decision(features[i]));
  }
  return 0.5 * lambda * norm2 + (features.empty() ? 0.0 : hinge / static_cast<double>(features.size()));
}

BinarySvm train_binary_svm(std::span<const SparseVector> features, std::span<const int> labels,
                           std::size_t dimension, const SvmOptions& options, numerics::Rng& rng,
                           SvmTrainLog* log) {
  if (features.size() != labels.size()) throw InputError("feature and label counts differ");
  if (!(options.lambda > 0.0) || options.epochs < 1) {
    throw ConfigError("svm needs lambda > 0 and at least one epoch");
  }
  const bool has_pos = std::find(labels.begin(), labels.end(), 1) != labels.end();
  const bool has_neg = std::find(labels.begin(), labels.end(), -1) != labels.end();
  if (!has_pos || !has_neg) throw ConfigError("svm training data contains a single class");
  for (int y : labels) {
    if (y != 1 && y != -1) throw InputError("svm labels must be +1 or -1");
  }
  for (const auto& x : features) {
    if (!x.indices.empty() && x.indices.back() >= dimension) {
      throw ShapeError("feature index outside dimension " + std::to_string(dimension));
    }
  }

  // w = scale * v keeps the per-step shrinkage O(1).
  std::vector<double> v(dimension, 0.0);
  double v_bias = 0.0;
  double scale = 1.0;
  std::vector<std::size_t> order(features.size());
  std::iota(order.begin(), order.end(), 0);
  std::uint64_t t = 0;
  BinarySvm model;

  auto materialize = [&]() {
    model.weights.resize(dimension);
    for (std::size_t j = 0; j < dimension; ++j) model.weights[j] = scale * v[j];
    model.bias = scale * v_bias;
  };

  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    for (std::size_t i : order) {
      ++t;
      const double eta = 1.0 / (options.lambda * static_cast<double>(t));
      const auto& x = features[i];
      const double y = labels[i];
      double margin = v_bias;
      for (std::size_t k = 0; k < x.indices.size(); ++k) margin += v[x.indices[k]] * x.values[k];
      margin *= scale * y;

      scale *= 1.0 - eta * options.lambda;
      if (scale <= 1e-9) {
        // Fold the scale back into v (it is exactly zero on the first step).
        for (double& w : v) w *= scale;
        v_bias *= scale;
        scale = 1.0;
      }
      if (margin < 1.0) {
        const double step = eta * y / scale;
        for (std::size_t k = 0; k < x.indices.size(); ++k) v[x.indices[k]] += step * x.values[k];
        v_bias += step;
      }
    }
    if (log) {
      materialize();
      log->objective.push_back(svm_objective(model, features, labels, options.lambda));
    }
  }
  materialize();
  return model;
}

std::vector<double> OneVsRestSvm::decision(const SparseVector& x) const {
  std::vector<double> margins;
  margins.reserve(models.size());
  for (const auto& m : models) margins.push_back(m.decision(x));
  return margins;
}

int OneVsRestSvm::predict_single(const SparseVector& x) const {
  const auto margins = decision(x);
  if (margins.empty()) throw InputError("one-vs-rest model has no classes");
  return static_cast<int>(std::max_element(margins.begin(), margins.end()) - margins.begin());
}

std::vector<int> OneVsRestSvm::predict_multi(const SparseVector& x, double threshold) const {
  std::vector<int> out;
  const auto margins = decision(x);
  for (std::size_t i = 0; i < margins.size(); ++i) {
    if (margins[i] > threshold) out.push_back(classes[i]);
  }
  return out;
}

OneVsRestSvm train_one_vs_rest(std::span<const SparseVector> features,
                               const std::vector<std::vector<int>>& label_sets,
                               const std::vector<int>& classes, std::size_t dimension,
                               const SvmOptions& options, numerics::Rng& rng) {
  if (features.size() != label_sets.size()) throw InputError("feature and label counts differ");
  OneVsRestSvm ovr;
  ovr.classes = classes;
  ovr.dimension = dimension;
  std::vector<int> y(features.size());
  for (int c : classes) {
    for (std::size_t i = 0; i < features.size(); ++i) {
      const auto& s = label_sets[i];
      y[i] = std::find(s.begin(), s.end(), c) != s.end() ? 1 : -1;
    }
    try {
      ovr.models.push_back(train_binary_svm(features, y, dimension, options, rng));
    } catch (const ConfigError&) {
      throw ConfigError("class " + std::to_string(c) + " lacks positive or negative examples");
    }
  }
  return ovr;
}

}  // namespace jointmap::baseline
