#include "jointmap/baseline/baseline_model.hpp"

#include <fstream>
#include <set>

#include "jointmap/binary_io.hpp"
#include "jointmap/error.hpp"

namespace jointmap::baseline {

namespace {

constexpr std::string_view kMagic = "JMSVM1";
// Label tag of the intent classifier in the file; categories use their id.
constexpr std::int64_t kIntentTag = -1;

void write_svm(std::ostream& out, std::int64_t tag, const BinarySvm& m) {
  binary::write_u64(out, static_cast<std::uint64_t>(tag));
  binary::write_f64(out, m.bias);
  for (double w : m.weights) binary::write_f64(out, w);
}

BinarySvm read_svm(std::istream& in, std::size_t dim, std::int64_t& tag) {
  tag = static_cast<std::int64_t>(binary::read_u64(in));
  BinarySvm m;
  m.bias = binary::read_f64(in);
  m.weights.resize(dim);
  for (auto& w : m.weights) w = binary::read_f64(in);
  return m;
}

}  // namespace

BaselinePrediction BaselineModel::predict(const std::vector<std::string>& tokens) const {
  const auto x = vectorizer.transform(tokens);
  BaselinePrediction p;
  p.intent_margin = intent.decision(x);
  p.commercial = p.intent_margin > 0.0;
  p.categories = categories.predict_multi(x, 0.0);
  return p;
}

BaselineModel train_baseline(const std::vector<BaselineExample>& examples,
                             const SvmOptions& options, numerics::Rng& rng) {
  if (examples.empty()) throw ConfigError("baseline needs training examples");
  BaselineModel model;
  std::vector<std::vector<std::string>> docs;
  docs.reserve(examples.size());
  for (const auto& e : examples) docs.push_back(e.tokens);
  model.vectorizer = TfIdfVectorizer::fit(docs);

  std::vector<SparseVector> x;
  std::vector<int> y;
  x.reserve(examples.size());
  for (const auto& e : examples) {
    x.push_back(model.vectorizer.transform(e.tokens));
    y.push_back(e.commercial ? 1 : -1);
  }
  const auto dim = model.vectorizer.dimension();
  model.intent = train_binary_svm(x, y, dim, options, rng);

  std::vector<SparseVector> cx;
  std::vector<std::vector<int>> labels;
  std::set<int> seen;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    if (!examples[i].commercial) continue;
    cx.push_back(x[i]);
    labels.push_back(examples[i].categories);
    seen.insert(examples[i].categories.begin(), examples[i].categories.end());
  }
  // A category present in every commercial example has no negatives.
  std::vector<int> classes;
  for (int c : seen) {
    std::size_t positives = 0;
    for (const auto& l : labels) positives += std::count(l.begin(), l.end(), c);
    if (positives < labels.size()) classes.push_back(c);
  }
  model.categories = train_one_vs_rest(cx, labels, classes, dim, options, rng);
  return model;
}

void save_baseline(const BaselineModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FileError("cannot write " + path.string());
  binary::write_magic(out, kMagic);
  const auto& vocab = model.vectorizer.vocabulary();
  binary::write_u64(out, model.vectorizer.documents());
  binary::write_u64(out, vocab.size());
  for (const auto& term : vocab) binary::write_string(out, term);
  for (double v : model.vectorizer.idf()) binary::write_f64(out, v);
  binary::write_u64(out, 1 + model.categories.models.size());
  write_svm(out, kIntentTag, model.intent);
  for (std::size_t i = 0; i < model.categories.models.size(); ++i) {
    write_svm(out, model.categories.classes[i], model.categories.models[i]);
  }
  if (!out) throw FileError("failed writing " + path.string());
}

BaselineModel load_baseline(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileError("missing baseline model " + path.string());
  binary::expect_magic(in, kMagic);
  const auto documents = binary::read_u64(in);
  const auto dim = binary::read_u64(in);
  std::vector<std::string> vocab(dim);
  for (auto& term : vocab) term = binary::read_string(in);
  std::vector<double> idf(dim);
  for (auto& v : idf) v = binary::read_f64(in);
  BaselineModel model;
  model.vectorizer = TfIdfVectorizer(std::move(vocab), std::move(idf), documents);
  const auto n = binary::read_u64(in);
  if (n == 0) throw FileError("baseline model has no intent classifier");
  model.categories.dimension = dim;
  for (std::uint64_t i = 0; i < n; ++i) {
    std::int64_t tag = 0;
    auto svm = read_svm(in, dim, tag);
    if (i == 0) {
      if (tag != kIntentTag) throw FileError("first classifier must be the intent model");
      model.intent = std::move(svm);
    } else {
      model.categories.classes.push_back(static_cast<int>(tag));
      model.categories.models.push_back(std::move(svm));
    }
  }
  return model;
}

}  // namespace jointmap::baseline
