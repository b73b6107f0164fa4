#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "jointmap/baseline/svm.hpp"
#include "jointmap/baseline/tfidf.hpp"

namespace jointmap::baseline {

struct BaselineExample {
  std::vector<std::string> tokens;
  bool commercial = true;
  std::vector<int> categories;
};

struct BaselinePrediction {
  bool commercial = true;
  double intent_margin = 0.0;  // > 0 means commercial
  std::vector<int> categories;
};

// tf*idf + linear SVM for both tasks: a binary intent classifier and
// independent per-category classifiers with a zero threshold.
struct BaselineModel {
  TfIdfVectorizer vectorizer;
  BinarySvm intent;
  OneVsRestSvm categories;

  BaselinePrediction predict(const std::vector<std::string>& tokens) const;
};

// Category classifiers are trained on commercial examples only, for each
// category with at least one positive there.
BaselineModel train_baseline(const std::vector<BaselineExample>& examples,
                             const SvmOptions& options, numerics::Rng& rng);

// Versioned binary file: magic "JMSVM1", vocabulary, idf array, then the
// classifiers, all numbers little-endian.
void save_baseline(const BaselineModel& model, const std::filesystem::path& path);
BaselineModel load_baseline(const std::filesystem::path& path);

}  // namespace jointmap::baseline
