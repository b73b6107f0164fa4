// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Directional criteria print every per-seed measurement.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "desk.hpp"
#include "jointmap/baseline/knn.hpp"
#include "jointmap/datasets/algorithm1.hpp"
#include "jointmap/datasets/algorithm2.hpp"
#include "jointmap/model/losses.hpp"
#include "jointmap/numerics/gradcheck.hpp"
#include "support/oracles.hpp"

namespace fs = std::filesystem;
using namespace jointmap;
using numerics::Rng;

namespace {

int failures = 0;

void report(int id, const std::string& name, bool pass, const std::string& detail) {
  std::printf("%s %d %s: %s\n", pass ? "PASS" : "FAIL", id, name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

void note(const std::string& line) {
  std::printf("  %s\n", line.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ------------------------------------------------------------ 1 gradients

void gradient_integrity() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto vocab = model::Vocabulary::build(
      {{"drill", "saw", "lamp", "bulb", "wire", "pipe", "tap", "how", "to", "fix", "hours"}});
  model::ModelConfig c;
  c.vocab_size = vocab.size();
  c.embedding_dim = 4;
  c.query_length = 4;
  c.heads = 2;
  c.categories = 3;
  c.embedding_init_scale = 0.5;
  c.dropout = 0.3;
  c.focal_alpha = {0.5, 1.0, 2.0};

  struct Sample {
    std::vector<std::string> tokens;
    corpus::Intent intent;
    std::vector<int> categories;
  };
  const std::vector<Sample> samples{
      {{"drill", "saw", "wire", "lamp", "bulb"}, corpus::Intent::kCommercial, {0, 2}},
      {{"lamp", "unknownword"}, corpus::Intent::kCommercial, {1}},
      {{"how", "to", "fix"}, corpus::Intent::kNonCommercial, {}},
      {{"pipe", "tap", "drill"}, corpus::Intent::kCommercial, {0}}};

  double worst = 0.0;
  std::size_t checked = 0;
  for (bool training : {false, true}) {
    Rng init(17);
    model::JointMapModel m(c, vocab, init);
    // Dropout masks are redrawn from the same seeds at every evaluation.
    const auto closure = [&](numerics::ParamStore& store, bool with_gradients) {
      auto grads = store.make_grad_buffer();
      double total = 0.0;
      for (std::size_t i = 0; i < samples.size(); ++i) {
        Rng rng(1000 + i);
        const auto trace = m.forward(samples[i].tokens, training, &rng);
        const auto loss =
            model::example_loss(m.config(), trace, samples[i].intent, samples[i].categories);
        total += loss.total;
        if (with_gradients) {
          m.backward(trace, loss.grad_category_logits, loss.grad_intent_logits, grads);
        }
      }
      if (with_gradients) store.accumulate(grads);
      return total;
    };
    const auto r = numerics::check_gradients(closure, m.params());
    worst = std::max(worst, r.worst());
    checked += r.params.size();
  }
  const double secs = seconds_since(t0);
  report(1, "gradient integrity", worst <= 1e-4 && secs < 60.0,
         "max relative error " + fmt("%.3g", worst) + " over " + std::to_string(checked) +
             " parameter tensors (eval and dropout modes), " + fmt("%.1f", secs) + " s");
}

// ---------------------------------------------------------------- 2 losses

void loss_identities() {
  Rng rng(2);
  double worst_focal = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const std::size_t n = 1 + rng.uniform_index(12);
    std::vector<double> logits(n), targets(n);
    for (std::size_t i = 0; i < n; ++i) {
      logits[i] = rng.uniform(-10.0, 10.0);
      targets[i] = rng.bernoulli(0.4) ? 1.0 : 0.0;
    }
    const std::vector<double> ones(n, 1.0);
    const double focal = model::focal_loss_pc(logits, targets, 0.0, ones);
    worst_focal = std::max(worst_focal, std::abs(focal - model::loss_pc(logits, targets)));
  }
  double worst_linear = 0.0;
  for (int t = 0; t < 20; ++t) {
    const double f = rng.uniform(0.0, 5.0), i = rng.uniform(0.0, 5.0);
    const double b1 = rng.uniform(0.0, 2.0), b2 = rng.uniform(0.0, 2.0);
    const double c1 = rng.uniform(0.0, 2.0), c2 = rng.uniform(0.0, 2.0);
    const double s = rng.uniform(0.1, 3.0);
    // Additive and homogeneous in the weight vector.
    const double sum = model::total_loss(f, i, b1 + c1, b2 + c2);
    const double parts = model::total_loss(f, i, b1, b2) + model::total_loss(f, i, c1, c2);
    const double scaled = model::total_loss(f, i, s * b1, s * b2);
    worst_linear = std::max({worst_linear, std::abs(sum - parts),
                             std::abs(scaled - s * model::total_loss(f, i, b1, b2)),
                             std::abs(model::total_loss(f, i, b1, b2) - (b1 * f + b2 * i))});
  }
  report(2, "loss identities", worst_focal <= 1e-12 && worst_linear <= 1e-12,
         "focal(gamma=0, alpha=1) vs BCE max diff " + fmt("%.3g", worst_focal) +
             " on 1000 instances; total_loss linearity max diff " + fmt("%.3g", worst_linear) +
             " at 20 points");
}

// ------------------------------------------------------- 3 oracle agreement

bool algorithm2_matches() {
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const int n_cat = 2 + static_cast<int>(rng.uniform_index(7));
    std::vector<corpus::Category> cats;
    for (int c = 0; c < n_cat; ++c) cats.push_back({c, "c" + std::to_string(c)});
    std::vector<corpus::Product> products;
    const int n_prod = 5 + static_cast<int>(rng.uniform_index(30));
    for (int p = 0; p < n_prod; ++p) {
      std::set<int> pc{static_cast<int>(rng.uniform_index(n_cat))};
      while (rng.bernoulli(0.25)) pc.insert(static_cast<int>(rng.uniform_index(n_cat)));
      products.push_back({p, {"p"}, {pc.begin(), pc.end()}});
    }
    const corpus::Taxonomy tax(cats, products);
    const std::size_t n_queries = 1 + rng.uniform_index(200);
    std::vector<datasets::PoolQuery> queries;
    std::vector<corpus::QueryId> ids;
    corpus::ClickLog clicks;
    for (std::size_t q = 1; q <= n_queries; ++q) {
      const auto id = static_cast<corpus::QueryId>(q);
      queries.push_back({id, {"q"}});
      ids.push_back(id);
      const auto records = rng.uniform_index(6);
      for (std::size_t k = 0; k < records; ++k) {
        clicks.push_back({id, static_cast<std::int64_t>(rng.uniform_index(n_prod)),
                          static_cast<std::int64_t>(rng.uniform_index(20))});
      }
    }
    const double r = trial % 2 == 0 ? static_cast<double>(rng.uniform_index(21)) / 20.0
                                    : rng.uniform(0.0, 1.0);
    const auto got = datasets::algorithm2_run(queries, clicks, tax, r);
    const auto want = oracle::algorithm2(ids, clicks, tax, r);
    if (got.dataset.size() != want.kept.size() || got.dropped_zero_clicks != want.zero_clicks ||
        got.dropped_empty != want.empty) {
      return false;
    }
    for (std::size_t i = 0; i < want.kept.size(); ++i) {
      if (got.dataset.records[i].query_id != want.kept[i].query ||
          got.dataset.records[i].categories != want.kept[i].categories) {
        return false;
      }
    }
  }
  return true;
}

double metrics_worst_error() {
  Rng rng(33);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n_classes = 1 + static_cast<int>(rng.uniform_index(8));
    std::vector<int> classes;
    for (int c = 0; c < n_classes; ++c) classes.push_back(c);
    const std::size_t n = 1 + rng.uniform_index(80);
    std::vector<std::vector<int>> pred(n), gold(n);
    for (std::size_t r = 0; r < n; ++r) {
      for (int c : classes) {
        if (rng.bernoulli(0.3)) pred[r].push_back(c);
        if (rng.bernoulli(0.3)) gold[r].push_back(c);
      }
    }
    const auto counts = eval::count(pred, gold, classes);
    const auto ref = oracle::f1_from_sets(pred, gold, classes);
    worst = std::max({worst, std::abs(eval::f1_macro(counts) - ref.macro),
                      std::abs(eval::f1_micro(counts) - ref.micro)});
  }
  return worst;
}

bool knn_matches() {
  Rng rng(34);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t dim = 5 + rng.uniform_index(40);
    const std::size_t n = 1 + rng.uniform_index(150);
    auto random_vec = [&] {
      baseline::SparseVector v;
      for (std::uint32_t t = 0; t < dim; ++t) {
        if (rng.bernoulli(0.2)) {
          v.indices.push_back(t);
          v.values.push_back(trial % 2 == 0 ? static_cast<double>(1 + rng.uniform_index(3))
                                            : rng.uniform(0.01, 1.0));
        }
      }
      return v;
    };
    std::vector<baseline::SparseVector> docs;
    for (std::size_t i = 0; i < n; ++i) docs.push_back(random_vec());
    const baseline::KnnIndex index(docs);
    const auto q = random_vec();
    const std::size_t k = 1 + rng.uniform_index(n);
    const auto got = index.query(q, k);
    const auto want = oracle::knn_brute_force(docs, q, k, dim);
    if (got.neighbors.size() != want.size()) return false;
    for (std::size_t i = 0; i < want.size(); ++i) {
      if (got.neighbors[i].id != want[i].id || got.neighbors[i].distance != want[i].distance) {
        return false;
      }
    }
  }
  return true;
}

void oracle_equivalence() {
  const bool alg2 = algorithm2_matches();
  const double metrics = metrics_worst_error();
  const bool knn = knn_matches();
  report(3, "oracle equivalence", alg2 && metrics <= 1e-12 && knn,
         std::string("algorithm2 vs exact rationals on 50 logs: ") + (alg2 ? "identical" : "DIFFER") +
             "; F1 vs exact oracle on 100 instances: max diff " + fmt("%.3g", metrics) +
             "; knn vs brute force on 100 indexes: " + (knn ? "identical" : "DIFFER"));
}

// --------------------------------------------------------- 4 algorithm 1

void algorithm1_convergence() {
  const auto t0 = std::chrono::steady_clock::now();
  corpus::CorpusConfig cc;
  cc.seed = 1;
  cc.ambiguity_rate = 0.05;
  const auto c = corpus::generate_corpus(cc);
  const corpus::Oracle oracle(c.queries);
  Rng rng(1);
  const auto carved = datasets::carve_seed_and_test(c.queries, oracle, 200, 25, rng);
  const datasets::Algorithm1Options options;
  const auto st =
      datasets::algorithm1_run(carved.seed, carved.pool, carved.test, oracle, options, rng);

  std::set<corpus::QueryId> ambiguous;
  for (const auto& q : c.queries) {
    if (q.ambiguous) ambiguous.insert(q.id);
  }
  std::size_t selected = 0, hits = 0;
  for (const auto& ids : st.tricky_history) {
    for (auto id : ids) {
      ++selected;
      hits += ambiguous.count(id);
    }
  }
  const double base = static_cast<double>(ambiguous.size()) / static_cast<double>(c.queries.size());
  const double rate = selected ? static_cast<double>(hits) / static_cast<double>(selected) : 0.0;
  const double enrichment = rate / base;
  const double secs = seconds_since(t0);
  const double accuracy = st.accuracy_history.back();
  report(4, "algorithm 1 convergence",
         st.converged && accuracy >= 0.95 && st.iteration <= 10 && enrichment >= 2.0 &&
             secs < 300.0,
         "held-out accuracy " + fmt("%.4f", accuracy) + " after " + std::to_string(st.iteration) +
             " iteration(s); tricky selections " + std::to_string(hits) + "/" +
             std::to_string(selected) + " ambiguous, enrichment " + fmt("%.2f", enrichment) +
             "x over base rate " + fmt("%.3f", base) + "; " + fmt("%.1f", secs) + " s");
}

// ------------------------------------------------------------ 9 determinism

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

bool run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd =
      std::string("\"") + JOINTMAP_CLI + "\" " + args + " > \"" + log.string() + "\" 2>&1";
  return std::system(cmd.c_str()) == 0;
}

void cli_determinism() {
  const fs::path root = fs::temp_directory_path() / "jointmap_acceptance_cli";
  fs::remove_all(root);
  fs::create_directories(root);
  const auto q = [](const fs::path& p) { return "\"" + p.string() + "\""; };
  const fs::path log = root / "log.txt";

  struct Step {
    std::string command;
    std::string args;
    std::string dir;
    std::vector<std::string> outputs;
  };
  const std::vector<Step> steps{
      {"generate-corpus", "--queries 1500 --noncommercial 0.05 --seed 3", "corpus",
       {"taxonomy.tsv", "queries.tsv", "clicks.tsv"}},
      {"build-datasets", "--corpus " + q(root / "corpus_a") + " --seed 3", "ds",
       {"dataset.tsv", "provenance.json"}},
      {"train",
       "--corpus " + q(root / "corpus_a") + " --dataset " + q(root / "ds_a" / "dataset.tsv") +
           " --dim 8 --epochs 2 --seed 3",
       "model", {"model.jmap", "baseline.svm", "report.jsonl"}},
      {"eval",
       "--corpus " + q(root / "corpus_a") + " --dataset " + q(root / "ds_a" / "dataset.tsv") +
           " --model " + q(root / "model_a"),
       "eval", {"metrics.tsv"}},
      {"predict", "--model " + q(root / "model_a") + " --query \"how to install my tiles\"",
       "predict", {"predictions.tsv"}}};

  bool ok = true;
  std::size_t compared = 0;
  std::string detail;
  for (const auto& s : steps) {
    const auto a = root / (s.dir + "_a"), b = root / (s.dir + "_b");
    if (!run_cli(s.command + " " + s.args + " --out " + q(a), log) ||
        !run_cli(s.command + " --config " + q(a / "run.json") + " --out " + q(b), log)) {
      ok = false;
      detail = s.command + " failed: " + slurp(log);
      break;
    }
    for (const auto& f : s.outputs) {
      ++compared;
      if (slurp(a / f).empty() || slurp(a / f) != slurp(b / f)) {
        ok = false;
        detail += s.command + "/" + f + " differs; ";
      }
    }
  }
  fs::remove_all(root);
  report(9, "CLI determinism", ok,
         ok ? std::to_string(compared) +
                  " outputs of generate-corpus, build-datasets, train, eval and predict "
                  "byte-identical when replayed from run.json"
            : detail);
}

// ------------------------------------------------------ 5-8 desk training

std::string per_seed(const std::vector<double>& a, const std::vector<double>& b) {
  std::string out;
  for (std::size_t i = 0; i < a.size(); ++i) {
    out += (i ? ", " : "") + std::string("seed ") + std::to_string(i + 1) + " " +
           fmt("%.4f", a[i]) + " vs " + fmt("%.4f", b[i]);
  }
  return out;
}

double mean_difference(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] - b[i];
  return s / static_cast<double>(a.size());
}

std::string category_f1s(const eval::PerClassCounts& counts) {
  std::string out;
  for (std::size_t k = 0; k < counts.classes.size(); ++k) {
    out += (k ? " " : "") + std::string("c") + std::to_string(counts.classes[k]) + "=" +
           fmt("%.3f", eval::f1(counts.counts[k]));
  }
  return out;
}

void desk_criteria() {
  const std::vector<std::uint64_t> seeds{1, 2, 3};

  // Skew 1: end-to-end learning and the baseline ordering.
  std::vector<double> jm_category, svm_category;
  for (auto seed : seeds) {
    const auto data = desk::make_data(seed, 1.0);
    const auto jm = desk::train_jointmap(data, desk::default_model_config(data));
    const auto svm = desk::train_baseline(data);
    note("skew 1 seed " + std::to_string(seed) + ": jointmap intent " +
         fmt("%.4f", jm.intent_macro()) + " category " + fmt("%.4f", jm.category_macro()) + " (" +
         fmt("%.0f", jm.seconds) + " s); tfidf_svm intent " + fmt("%.4f", svm.intent_macro()) +
         " category " + fmt("%.4f", svm.category_macro()));
    if (seed == 1) {
      report(5, "end-to-end learning",
             jm.intent_macro() >= 0.90 && jm.category_macro() >= 0.85 && jm.seconds < 900.0,
             "test intent macro-F1 " + fmt("%.4f", jm.intent_macro()) + ", category macro-F1 " +
                 fmt("%.4f", jm.category_macro()) + " after 30 epochs, " +
                 fmt("%.0f", jm.seconds) + " s single-threaded");
    }
    jm_category.push_back(jm.category_macro());
    svm_category.push_back(svm.category_macro());
  }
  const double baseline_gap = mean_difference(jm_category, svm_category);
  report(8, "baseline sanity", baseline_gap > 0.0,
         "category macro-F1 jointmap vs tfidf_svm: " + per_seed(jm_category, svm_category) +
             "; mean gap " + fmt("%+.4f", baseline_gap));

  // Skew 2: minority classes are the three with the fewest training queries.
  std::vector<double> joint, category_only, focal, plain;
  std::vector<std::string> zero_classes;
  for (auto seed : seeds) {
    const auto data = desk::make_data(seed, 2.0);
    const auto minority = eval::lowest_support_classes(data.category_support, data.categories, 3);
    std::string support;
    for (int c : data.categories) {
      support += " c" + std::to_string(c) + "=" + std::to_string(data.category_support.at(c));
    }
    note("skew 2 seed " + std::to_string(seed) + " train support:" + support);

    const auto base = desk::default_model_config(data);
    const auto j = desk::train_jointmap(data, base);
    auto ablation = base;
    ablation.beta_intent = 0.0;
    const auto a = desk::train_jointmap(data, ablation);
    auto no_focal = base;
    no_focal.focal_gamma = 0.0;
    const auto p = desk::train_jointmap(data, no_focal);

    joint.push_back(eval::minority_report(j.category, minority));
    category_only.push_back(eval::minority_report(a.category, minority));
    focal.push_back(joint.back());
    plain.push_back(eval::minority_report(p.category, minority));
    note("  joint gamma=1.5: " + category_f1s(j.category));
    note("  beta_intent=0:   " + category_f1s(a.category));
    note("  gamma=0:         " + category_f1s(p.category));
    for (std::size_t k = 0; k < data.categories.size(); ++k) {
      const int c = data.categories[k];
      if (data.category_support.at(c) >= 20 && eval::f1(j.category.at(c)) == 0.0) {
        zero_classes.push_back("seed " + std::to_string(seed) + " c" + std::to_string(c));
      }
    }
  }
  const double joint_gap = mean_difference(joint, category_only);
  report(6, "joint over category-only", joint_gap > 0.0,
         "minority macro-F1 joint vs beta_intent=0: " + per_seed(joint, category_only) +
             "; mean gap " + fmt("%+.4f", joint_gap));
  const double focal_gap = mean_difference(focal, plain);
  std::string zeros;
  for (const auto& z : zero_classes) zeros += " " + z;
  report(7, "focal loss", focal_gap > 0.0 && zero_classes.empty(),
         "minority macro-F1 gamma=1.5 vs gamma=0: " + per_seed(focal, plain) + "; mean gap " +
             fmt("%+.4f", focal_gap) + "; classes with >= 20 train queries at F1 0 under focal:" +
             (zeros.empty() ? std::string(" none") : zeros));
}

}  // namespace

int main() {
  const auto t0 = std::chrono::steady_clock::now();
  gradient_integrity();
  loss_identities();
  oracle_equivalence();
  algorithm1_convergence();
  cli_determinism();
  desk_criteria();
  std::printf("%d criteria failed; total %.0f s\n", failures, seconds_since(t0));
  return failures == 0 ? 0 : 1;
}
