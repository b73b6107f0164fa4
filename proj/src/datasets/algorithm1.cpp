#include "jointmap/datasets/algorithm1.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>

#include "jointmap/baseline/knn.hpp"
#include "jointmap/datasets/sampling.hpp"
#include "jointmap/error.hpp"

namespace jointmap::datasets {

namespace {

int intent_sign(Intent i) { return i == Intent::kCommercial ? 1 : -1; }

bool has_both_intents(const LabeledDataset& ds) {
  bool c = false, nc = false;
  for (const auto& r : ds.records) (r.intent == Intent::kCommercial ? c : nc) = true;
  return c && nc;
}

}  // namespace

LabeledDataset knn_expand(const LabeledDataset& labeled, const std::vector<PoolQuery>& pool,
                          const baseline::TfIdfVectorizer& vectorizer,
                          const KnnExpandOptions& options) {
  if (options.k < 1) throw ConfigError("knn expansion needs k >= 1");
  if (!(options.agreement >= 0.0 && options.agreement <= 1.0)) {
    throw ConfigError("knn agreement must lie in [0, 1]");
  }
  LabeledDataset out = labeled;
  if (pool.empty()) return out;
  if (labeled.records.empty()) throw ConfigError("knn expansion needs a non-empty labeled set");

  std::vector<baseline::SparseVector> vectors;
  vectors.reserve(labeled.records.size());
  for (const auto& r : labeled.records) vectors.push_back(vectorizer.transform(r.tokens));
  const baseline::KnnIndex index(std::move(vectors));

  std::int64_t next_id = labeled.max_record_id() + 1;
  for (const auto& q : pool) {
    const auto result = index.query(vectorizer.transform(q.tokens), options.k);
    // A neighbour sharing no term (cosine distance 1) is only there by tie
    // order and carries no evidence; the query waits until k real ones exist.
    std::size_t commercial = 0, votes = 0;
    for (const auto& n : result.neighbors) {
      if (n.distance >= 1.0) continue;
      ++votes;
      commercial += labeled.records[n.id].intent == Intent::kCommercial ? 1 : 0;
    }
    if (votes < options.k) continue;
    const std::size_t best = std::max(commercial, votes - commercial);
    if (static_cast<double>(best) < options.agreement * static_cast<double>(votes)) continue;
    if (commercial * 2 == votes) continue;  // tie carries no label
    LabeledRecord rec;
    rec.record_id = next_id++;
    rec.query_id = q.id;
    rec.tokens = q.tokens;
    rec.intent = commercial * 2 > votes ? Intent::kCommercial : Intent::kNonCommercial;
    rec.provenance = Provenance::kKnn;
    out.records.push_back(std::move(rec));
  }
  return out;
}

LabeledDataset knn_expand(const LabeledDataset& labeled, const std::vector<PoolQuery>& pool,
                          const KnnExpandOptions& options) {
  if (pool.empty()) return labeled;
  std::vector<std::vector<std::string>> docs;
  for (const auto& r : labeled.records) docs.push_back(r.tokens);
  for (const auto& q : pool) docs.push_back(q.tokens);
  return knn_expand(labeled, pool, baseline::TfIdfVectorizer::fit(docs), options);
}

std::vector<QueryId> find_tricky_samples(const std::vector<ScoredQuery>& scores, double tau) {
  std::vector<ScoredQuery> band;
  for (const auto& s : scores) {
    if (std::abs(s.margin) < tau) band.push_back(s);
  }
  std::sort(band.begin(), band.end(), [](const ScoredQuery& a, const ScoredQuery& b) {
    const double ma = std::abs(a.margin), mb = std::abs(b.margin);
    return ma < mb || (ma == mb && a.id < b.id);
  });
  std::vector<QueryId> ids;
  ids.reserve(band.size());
  for (const auto& s : band) ids.push_back(s.id);
  return ids;
}

SeedSplit carve_seed_and_test(const std::vector<corpus::Query>& queries,
                              const corpus::Oracle& oracle, std::size_t seed_per_class,
                              std::size_t test_per_class, numerics::Rng& rng) {
  std::vector<std::size_t> order(queries.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  rng.shuffle(std::span<std::size_t>(order));

  SeedSplit out;
  std::map<Intent, std::size_t> seeds, tests;
  std::int64_t seed_id = 1, test_id = 1;
  const auto quotas_open = [&] {
    for (Intent i : {Intent::kCommercial, Intent::kNonCommercial}) {
      if (tests[i] < test_per_class || seeds[i] < seed_per_class) return true;
    }
    return false;
  };
  for (std::size_t i : order) {
    const auto& q = queries[i];
    // Once every quota is met the rest go to the pool without an oracle call.
    if (!quotas_open()) {
      out.pool.push_back({q.id, q.tokens});
      continue;
    }
    const auto intent = oracle.label(q.id).intent;
    LabeledRecord rec;
    rec.query_id = q.id;
    rec.tokens = q.tokens;
    rec.intent = intent;
    if (tests[intent] < test_per_class) {
      ++tests[intent];
      rec.record_id = test_id++;
      rec.provenance = Provenance::kOracle;
      out.test.records.push_back(std::move(rec));
    } else if (seeds[intent] < seed_per_class) {
      ++seeds[intent];
      rec.record_id = seed_id++;
      rec.provenance = Provenance::kSeed;
      out.seed.records.push_back(std::move(rec));
    } else {
      out.pool.push_back({q.id, q.tokens});
    }
  }
  std::sort(out.pool.begin(), out.pool.end(),
            [](const PoolQuery& a, const PoolQuery& b) { return a.id < b.id; });
  return out;
}

ActiveLearningState algorithm1_run(const LabeledDataset& seed, const std::vector<PoolQuery>& pool,
                                   const LabeledDataset& test, const corpus::Oracle& oracle,
                                   const Algorithm1Options& options, numerics::Rng& rng) {
  if (!has_both_intents(seed)) throw ConfigError("seed set must contain both intents");
  if (test.records.empty()) throw ConfigError("algorithm 1 needs a held-out test set");
  if (options.max_iters < 1) throw ConfigError("max_iters must be >= 1");

  ActiveLearningState state;
  state.labeled = seed;
  state.test = test;
  state.tau = options.tau;
  state.stop_threshold = options.stop_threshold;

  std::vector<std::vector<std::string>> docs;
  for (const auto& r : seed.records) docs.push_back(r.tokens);
  for (const auto& q : pool) docs.push_back(q.tokens);
  const auto vectorizer = baseline::TfIdfVectorizer::fit(docs);

  std::vector<PoolQuery> remaining = pool;
  std::vector<baseline::SparseVector> test_x;
  for (const auto& r : test.records) test_x.push_back(vectorizer.transform(r.tokens));

  auto train_scorer = [&](const LabeledDataset& labeled) {
    // The held-out set is balanced by intent while the labeled set follows
    // the corpus prior, so the scorer sees non-commercial records duplicated
    // up to the same target the model training uses.
    const LabeledDataset ds = options.scorer_balance > 0.0
                                  ? oversample_minority(labeled, options.scorer_balance, rng)
                                  : labeled;
    std::vector<baseline::SparseVector> x;
    std::vector<int> y;
    x.reserve(ds.records.size());
    for (const auto& r : ds.records) {
      x.push_back(vectorizer.transform(r.tokens));
      y.push_back(intent_sign(r.intent));
    }
    return baseline::train_binary_svm(x, y, vectorizer.dimension(), options.svm, rng);
  };

  for (int iter = 1; iter <= options.max_iters; ++iter) {
    // Expand with KNN labels.
    const std::size_t before = state.labeled.records.size();
    state.labeled = knn_expand(state.labeled, remaining, vectorizer, options.knn);
    if (state.labeled.records.size() > before) {
      std::unordered_map<QueryId, bool> taken;
      for (std::size_t i = before; i < state.labeled.records.size(); ++i) {
        taken[state.labeled.records[i].query_id] = true;
      }
      std::erase_if(remaining, [&](const PoolQuery& q) { return taken.count(q.id) != 0; });
    }

    // Score everything not yet verified by the oracle.
    const auto scorer = train_scorer(state.labeled);
    std::vector<ScoredQuery> scores;
    std::unordered_map<QueryId, std::size_t> labeled_index;
    for (std::size_t i = 0; i < state.labeled.records.size(); ++i) {
      const auto& r = state.labeled.records[i];
      labeled_index[r.query_id] = i;
      if (r.provenance == Provenance::kKnn) {
        scores.push_back({r.query_id, scorer.decision(vectorizer.transform(r.tokens))});
      }
    }
    std::unordered_map<QueryId, const PoolQuery*> remaining_index;
    for (const auto& q : remaining) {
      remaining_index[q.id] = &q;
      scores.push_back({q.id, scorer.decision(vectorizer.transform(q.tokens))});
    }

    auto tricky = find_tricky_samples(scores, options.tau);
    if (tricky.size() > options.relabel_budget) tricky.resize(options.relabel_budget);

    // Oracle relabel and merge.
    std::int64_t next_id = state.labeled.max_record_id() + 1;
    std::unordered_map<QueryId, bool> moved;
    for (QueryId id : tricky) {
      const auto intent = oracle.label(id).intent;
      if (auto it = labeled_index.find(id); it != labeled_index.end()) {
        auto& r = state.labeled.records[it->second];
        r.intent = intent;
        r.provenance = Provenance::kOracle;
      } else {
        LabeledRecord rec;
        rec.record_id = next_id++;
        rec.query_id = id;
        rec.tokens = remaining_index.at(id)->tokens;
        rec.intent = intent;
        rec.provenance = Provenance::kOracle;
        state.labeled.records.push_back(std::move(rec));
        moved[id] = true;
      }
    }
    std::erase_if(remaining, [&](const PoolQuery& q) { return moved.count(q.id) != 0; });

    // Held-out accuracy of the scorer retrained on the merged set.
    const auto refreshed = train_scorer(state.labeled);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < test.records.size(); ++i) {
      const bool predicted_commercial = refreshed.decision(test_x[i]) > 0.0;
      correct += predicted_commercial == (test.records[i].intent == Intent::kCommercial) ? 1 : 0;
    }
    const double accuracy = static_cast<double>(correct) / static_cast<double>(test.records.size());

    state.iteration = iter;
    state.accuracy_history.push_back(accuracy);
    state.labeled_size_history.push_back(state.labeled.records.size());
    state.tricky_history.push_back(std::move(tricky));
    if (accuracy >= options.stop_threshold) {
      state.converged = true;
      break;
    }
  }
  return state;
}

}  // namespace jointmap::datasets
