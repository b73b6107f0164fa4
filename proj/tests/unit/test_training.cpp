#include <cstdio>
#include <string>

#include "doctest.h"
#include "jointmap/corpus/corpus.hpp"
#include "jointmap/error.hpp"
#include "jointmap/model/training.hpp"

using namespace jointmap;
using namespace jointmap::model;
using corpus::Intent;

namespace {

struct Fixture {
  std::vector<TrainExample> train;
  std::vector<TrainExample> val;
  ModelConfig config;
  Vocabulary vocab;
};

Fixture make_fixture(int queries, std::size_t dim) {
  corpus::CorpusConfig cc;
  cc.queries = queries;
  cc.noncommercial_fraction = 0.2;
  cc.seed = 11;
  const auto c = corpus::generate_corpus(cc);
  Fixture f;
  std::vector<std::vector<std::string>> tokens;
  for (std::size_t i = 0; i < c.queries.size(); ++i) {
    const auto& q = c.queries[i];
    TrainExample e{q.tokens, q.intent, q.categories};
    if (i % 5 == 0) {
      f.val.push_back(e);
    } else {
      f.train.push_back(e);
      tokens.push_back(q.tokens);
    }
  }
  f.vocab = Vocabulary::build(tokens);
  f.config.vocab_size = f.vocab.size();
  f.config.embedding_dim = dim;
  f.config.heads = 2;
  f.config.categories = static_cast<std::size_t>(cc.categories);
  return f;
}

JointMapModel fresh_model(const Fixture& f, std::uint64_t seed = 3) {
  numerics::Rng init(seed);
  return JointMapModel(f.config, f.vocab, init);
}

bool same_parameters(const JointMapModel& a, const JointMapModel& b) {
  for (std::size_t p = 0; p < a.params().size(); ++p) {
    const auto va = a.params()[p].value.values();
    const auto vb = b.params()[p].value.values();
    if (!std::equal(va.begin(), va.end(), vb.begin(), vb.end())) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("zero learning rate leaves parameters unchanged") {
  const auto f = make_fixture(200, 8);
  auto m = fresh_model(f);
  const auto before = fresh_model(f);
  TrainOptions opt;
  opt.epochs = 2;
  opt.learning_rate = 0.0;
  opt.keep_best = false;
  numerics::Rng rng(1);
  train(m, f.train, f.val, opt, rng);
  CHECK(same_parameters(m, before));
}

TEST_CASE("a single Adam step lowers the batch loss") {
  auto f = make_fixture(200, 8);
  f.config.dropout = 0.0;
  auto m = fresh_model(f);
  const std::span<const TrainExample> batch(f.train.data(), 32);
  const double before = batch_loss(m, batch, false, 0, nullptr);
  auto grads = m.params().make_grad_buffer();
  batch_loss(m, batch, true, 0, &grads);
  m.params().zero_grad();
  m.params().accumulate(grads);
  numerics::adam_step(m.params(), 1e-3);
  CHECK(batch_loss(m, batch, false, 0, nullptr) < before);
}

TEST_CASE("batch gradients do not depend on the thread count") {
  const auto f = make_fixture(200, 8);
  const auto m = fresh_model(f);
  const std::span<const TrainExample> batch(f.train.data(), 50);
  auto g1 = m.params().make_grad_buffer();
  auto g4 = m.params().make_grad_buffer();
  const double l1 = batch_loss(m, batch, true, 42, &g1, 1);
  const double l4 = batch_loss(m, batch, true, 42, &g4, 4);
  CHECK(l1 == l4);
  for (std::size_t p = 0; p < g1.size(); ++p) {
    const auto a = g1[p].values();
    const auto b = g4[p].values();
    CHECK(std::equal(a.begin(), a.end(), b.begin(), b.end()));
  }
}

TEST_CASE("training is reproducible and learns") {
  const auto f = make_fixture(600, 16);
  TrainOptions opt;
  opt.epochs = 4;
  opt.batch_size = 32;
  opt.learning_rate = 5e-3;

  auto a = fresh_model(f);
  auto b = fresh_model(f);
  numerics::Rng ra(5), rb(5);
  const auto rep_a = train(a, f.train, f.val, opt, ra);
  opt.threads = 3;
  const auto rep_b = train(b, f.train, f.val, opt, rb);
  CHECK(same_parameters(a, b));
  REQUIRE(rep_a.epochs.size() == 4);
  for (std::size_t e = 0; e < 4; ++e) {
    CHECK(rep_a.epochs[e].train_loss == rep_b.epochs[e].train_loss);
    CHECK(rep_a.epochs[e].epoch == static_cast<int>(e) + 1);
  }
  CHECK(rep_a.best_epoch == rep_b.best_epoch);
  CHECK(rep_a.epochs.back().train_loss < rep_a.epochs.front().train_loss);
  CHECK(rep_a.epochs[static_cast<std::size_t>(rep_a.best_epoch) - 1].val_macro_f1_intent > 0.5);

  // The restored parameters score what the best epoch reported.
  const auto scores = evaluate(a, f.val);
  const auto& best = rep_a.epochs[static_cast<std::size_t>(rep_a.best_epoch) - 1];
  CHECK(eval::f1_macro(scores.intent) == best.val_macro_f1_intent);
  CHECK(eval::f1_macro(scores.category) == best.val_macro_f1_category);
}

TEST_CASE("no validation set keeps the last epoch") {
  const auto f = make_fixture(200, 8);
  auto m = fresh_model(f);
  TrainOptions opt;
  opt.epochs = 2;
  numerics::Rng rng(1);
  const auto rep = train(m, f.train, {}, opt, rng);
  CHECK(rep.best_epoch == 2);
}

TEST_CASE("evaluate scopes the category task to commercial gold") {
  const auto f = make_fixture(200, 8);
  const auto m = fresh_model(f);
  const auto s = evaluate(m, f.val);
  std::size_t commercial = 0;
  for (const auto& e : f.val) commercial += e.intent == Intent::kCommercial;
  CHECK(s.intent.records == f.val.size());
  CHECK(s.category.records == commercial);
  CHECK(s.intent.classes.size() == 2);
  CHECK(s.category.classes.size() == f.config.categories);
}

TEST_CASE("training errors") {
  const auto f = make_fixture(200, 8);
  auto m = fresh_model(f);
  numerics::Rng rng(1);
  CHECK_THROWS_AS(train(m, {}, f.val, {}, rng), ConfigError);
  TrainOptions bad;
  bad.epochs = -1;
  CHECK_THROWS_AS(train(m, f.train, f.val, bad, rng), ConfigError);
  bad = {};
  bad.batch_size = 0;
  CHECK_THROWS_AS(train(m, f.train, f.val, bad, rng), ConfigError);
}

TEST_CASE("epoch report json line") {
  const EpochReport e{3, 0.25, 0.5, 0.125};
  CHECK(to_json_line(e) ==
        R"({"epoch":3,"train_loss":0.25,"val_macro_f1_intent":0.5,"val_macro_f1_category":0.125})");
  const EpochReport g{1, 0.1, 1.0 / 3.0, 0.0};
  const auto line = to_json_line(g);
  double parsed = 0.0;
  const auto pos = line.find("val_macro_f1_intent\":");
  REQUIRE(pos != std::string::npos);
  std::sscanf(line.c_str() + pos + 21, "%lf", &parsed);
  CHECK(parsed == 1.0 / 3.0);
}
