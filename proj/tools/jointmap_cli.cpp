// jointmap: corpus generation, dataset building, training, evaluation and
// prediction from the command line.
//
// Every subcommand writes run.json under --out with the fully resolved
// options. Passing that file back through --config repeats the run; flags
// given explicitly on the command line override values from the file.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "jointmap/baseline/baseline_model.hpp"
#include "jointmap/corpus/corpus.hpp"
#include "jointmap/datasets/algorithm1.hpp"
#include "jointmap/datasets/algorithm2.hpp"
#include "jointmap/datasets/labeled_dataset.hpp"
#include "jointmap/datasets/sampling.hpp"
#include "jointmap/error.hpp"
#include "jointmap/eval/metrics.hpp"
#include "jointmap/model/checkpoint.hpp"
#include "jointmap/model/training.hpp"
#include "jointmap/text.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace jointmap;

namespace {

constexpr const char* kModelFile = "model.jmap";
constexpr const char* kBaselineFile = "baseline.svm";

// Binds CLI options to variables and remembers how to echo them.
class OptionSet {
 public:
  explicit OptionSet(CLI::App* app) : app_(app) {}

  template <typename T>
  CLI::Option* add(const std::string& name, T& target, const std::string& help) {
    writers_.emplace_back(name, [&target](json& out, const std::string& key) { out[key] = target; });
    return app_->add_option("--" + name, target, help)->capture_default_str();
  }

  json to_json(const std::string& command) const {
    json out;
    out["command"] = command;
    for (const auto& [name, write] : writers_) write(out, name);
    return out;
  }

 private:
  CLI::App* app_;
  std::vector<std::pair<std::string, std::function<void(json&, const std::string&)>>> writers_;
};

struct Common {
  std::uint64_t seed = 1;
  std::string out;
  std::size_t threads = 1;
  std::string config;
};

void add_common(OptionSet& opts, Common& c) {
  opts.add("seed", c.seed, "Random seed");
  opts.add("out", c.out, "Output directory")->required();
  opts.add("threads", c.threads, "Worker thread cap")->check(CLI::PositiveNumber);
}

fs::path prepare_out(const Common& c, const OptionSet& opts, const std::string& command) {
  const fs::path dir(c.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw FileError("cannot create " + dir.string() + ": " + ec.message());
  std::ofstream run(dir / "run.json", std::ios::binary);
  if (!run) throw FileError("cannot write " + (dir / "run.json").string());
  run << opts.to_json(command).dump(2) << '\n';
  return dir;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FileError("cannot write " + path.string());
  out << text;
}

// ---------------------------------------------------------------- generate

struct GenerateArgs {
  Common common;
  corpus::CorpusConfig corpus;
};

void run_generate(const GenerateArgs& a, const OptionSet& opts) {
  const auto dir = prepare_out(a.common, opts, "generate-corpus");
  auto cfg = a.corpus;
  cfg.seed = a.common.seed;
  const auto c = corpus::generate_corpus(cfg);
  corpus::write_corpus(c, dir);
  std::size_t noncommercial = 0;
  for (const auto& q : c.queries) noncommercial += q.intent == corpus::Intent::kNonCommercial;
  std::printf("wrote %zu queries (%zu non-commercial), %zu products, %zu click records to %s\n",
              c.queries.size(), noncommercial, c.taxonomy.products().size(), c.clicks.size(),
              dir.string().c_str());
}

// ------------------------------------------------------------ build-datasets

struct BuildArgs {
  Common common;
  std::string corpus_dir;
  std::size_t seed_per_class = 200;
  std::size_t test_per_class = 25;
  datasets::Algorithm1Options alg1;
  double r = 0.1;
  double oversample = 0.5;
};

void run_build(const BuildArgs& a, const OptionSet& opts) {
  const auto dir = prepare_out(a.common, opts, "build-datasets");
  const auto c = corpus::read_corpus(a.corpus_dir);
  const corpus::Oracle oracle(c.queries);
  numerics::Rng rng(a.common.seed);

  // Intent labels by distant supervision with active learning.
  const auto carved =
      datasets::carve_seed_and_test(c.queries, oracle, a.seed_per_class, a.test_per_class, rng);
  const auto state =
      datasets::algorithm1_run(carved.seed, carved.pool, carved.test, oracle, a.alg1, rng);

  std::vector<datasets::LabeledRecord> intent_labeled = state.labeled.records;
  intent_labeled.insert(intent_labeled.end(), carved.test.records.begin(),
                        carved.test.records.end());

  // Category labels from clicks for the queries labeled commercial.
  std::vector<datasets::PoolQuery> commercial;
  for (const auto& r : intent_labeled) {
    if (r.intent == corpus::Intent::kCommercial) commercial.push_back({r.query_id, r.tokens});
  }
  const auto alg2 = datasets::algorithm2_run(commercial, c.clicks, c.taxonomy, a.r);
  std::map<corpus::QueryId, std::vector<corpus::CategoryId>> categories;
  for (const auto& r : alg2.dataset.records) categories[r.query_id] = r.categories;

  datasets::LabeledDataset merged;
  std::map<std::string, std::size_t> provenance_counts;
  for (auto r : intent_labeled) {
    if (r.intent == corpus::Intent::kCommercial) {
      const auto it = categories.find(r.query_id);
      if (it == categories.end()) continue;
      r.categories = it->second;
    }
    r.record_id = static_cast<std::int64_t>(merged.records.size()) + 1;
    ++provenance_counts[datasets::provenance_name(r.provenance)];
    merged.records.push_back(std::move(r));
  }
  auto split = datasets::split_dataset(merged, a.common.seed);
  const auto before = split.size();
  split = datasets::oversample_minority(split, a.oversample, rng);
  datasets::write_dataset(split, dir / "dataset.tsv");

  json report;
  report["algorithm1"] = {{"iterations", state.iteration},
                          {"converged", state.converged},
                          {"accuracy_history", state.accuracy_history},
                          {"labeled_size_history", state.labeled_size_history},
                          {"oracle_calls", oracle.calls()}};
  json tricky = json::array();
  for (const auto& t : state.tricky_history) tricky.push_back(t.size());
  report["algorithm1"]["tricky_per_iteration"] = tricky;
  report["algorithm2"] = {{"r", a.r},
                          {"queries", commercial.size()},
                          {"kept", alg2.dataset.size()},
                          {"dropped_zero_clicks", alg2.dropped_zero_clicks},
                          {"dropped_empty", alg2.dropped_empty}};
  report["unlabeled_pool_queries"] = c.queries.size() - intent_labeled.size();
  report["provenance"] = provenance_counts;
  report["oversampled"] = split.size() - before;
  json splits;
  for (auto s : {datasets::Split::kTrain, datasets::Split::kVal, datasets::Split::kTest}) {
    splits[datasets::split_name(s)] = {
        {"commercial", split.count(s, corpus::Intent::kCommercial)},
        {"non-commercial", split.count(s, corpus::Intent::kNonCommercial)}};
  }
  report["splits"] = splits;
  write_text(dir / "provenance.json", report.dump(2) + "\n");
  std::printf("algorithm 1: %d iterations, accuracy %.4f%s; dataset: %zu records -> %s\n",
              state.iteration, state.accuracy_history.back(),
              state.converged ? "" : " (not converged)", split.size(),
              (dir / "dataset.tsv").string().c_str());
}

// --------------------------------------------------------------------- train

struct TrainArgs {
  Common common;
  std::string corpus_dir;
  std::string dataset;
  model::ModelConfig model;
  model::TrainOptions train;
  std::string word_vectors;
  bool baseline = true;
  baseline::SvmOptions svm;
};

std::vector<model::TrainExample> examples_of(const datasets::LabeledDataset& ds,
                                             datasets::Split split) {
  std::vector<model::TrainExample> out;
  for (const auto& r : ds.records) {
    if (r.split == split) out.push_back({r.tokens, r.intent, r.categories});
  }
  return out;
}

void run_train(TrainArgs a, const OptionSet& opts) {
  const auto dir = prepare_out(a.common, opts, "train");
  const auto c = corpus::read_corpus(a.corpus_dir);
  const auto ds = datasets::read_dataset(a.dataset, c.queries);
  const auto train_set = examples_of(ds, datasets::Split::kTrain);
  const auto val_set = examples_of(ds, datasets::Split::kVal);

  std::vector<std::vector<std::string>> tokens;
  for (const auto& e : train_set) tokens.push_back(e.tokens);
  auto vocab = model::Vocabulary::build(tokens);
  a.model.vocab_size = vocab.size();
  a.model.categories = c.taxonomy.category_count();
  for (const auto& cat : c.taxonomy.categories()) {
    if (cat.id < 0 || static_cast<std::size_t>(cat.id) >= a.model.categories) {
      throw InputError("category ids must be 0.." + std::to_string(a.model.categories - 1));
    }
  }
  a.train.threads = a.common.threads;

  numerics::Rng rng(a.common.seed);
  numerics::Rng init(rng.next());
  model::JointMapModel m(a.model, std::move(vocab), init);
  if (!a.word_vectors.empty()) {
    const auto loaded = m.load_word_vectors(a.word_vectors);
    std::printf("loaded %zu word vectors\n", loaded);
  }

  std::ofstream report(dir / "report.jsonl", std::ios::binary);
  if (!report) throw FileError("cannot write " + (dir / "report.jsonl").string());
  const auto result = model::train(m, train_set, val_set, a.train, rng, [&](const auto& e) {
    const auto line = model::to_json_line(e);
    report << line << '\n';
    std::printf("%s\n", line.c_str());
    std::fflush(stdout);
  });
  model::save_checkpoint(m, dir / kModelFile);
  std::printf("best epoch %d; checkpoint %s\n", result.best_epoch,
              (dir / kModelFile).string().c_str());

  if (a.baseline) {
    std::vector<baseline::BaselineExample> bex;
    for (const auto& e : train_set) {
      bex.push_back({e.tokens, e.intent == corpus::Intent::kCommercial, e.categories});
    }
    numerics::Rng svm_rng(rng.next());
    const auto b = baseline::train_baseline(bex, a.svm, svm_rng);
    baseline::save_baseline(b, dir / kBaselineFile);
    std::printf("baseline %s\n", (dir / kBaselineFile).string().c_str());
  }
}

// ---------------------------------------------------------------------- eval

struct EvalArgs {
  Common common;
  std::string corpus_dir;
  std::string dataset;
  std::string model_dir;
};

eval::MethodScores to_scores(const std::string& name, const model::TaskScores& s) {
  return {name, eval::f1_macro(s.intent), eval::f1_micro(s.intent), eval::f1_macro(s.category),
          eval::f1_micro(s.category)};
}

void run_eval(const EvalArgs& a, const OptionSet& opts) {
  const fs::path model_dir(a.model_dir);
  const auto m = model::load_checkpoint(model_dir / kModelFile);
  const auto dir = prepare_out(a.common, opts, "eval");
  const auto c = corpus::read_corpus(a.corpus_dir);
  const auto ds = datasets::read_dataset(a.dataset, c.queries);
  const corpus::Oracle oracle(c.queries);

  // Gold labels come from the corpus, not from the distant labels.
  std::vector<model::TrainExample> test;
  std::set<corpus::QueryId> seen;
  for (const auto& r : ds.records) {
    if (r.split != datasets::Split::kTest || !seen.insert(r.query_id).second) continue;
    const auto& gold = oracle.label(r.query_id);
    test.push_back({r.tokens, gold.intent, gold.categories});
  }
  if (test.empty()) throw InputError("dataset has no test records");
  if (m.config().categories != c.taxonomy.category_count()) {
    throw InputError("checkpoint category count does not match the corpus taxonomy");
  }

  std::vector<eval::MethodScores> rows{to_scores("jointmap", model::evaluate(m, test))};
  if (fs::exists(model_dir / kBaselineFile)) {
    const auto b = baseline::load_baseline(model_dir / kBaselineFile);
    std::vector<int> ip, ig;
    std::vector<std::vector<int>> cp, cg;
    for (const auto& e : test) {
      const auto p = b.predict(e.tokens);
      ip.push_back(p.commercial ? 0 : 1);
      ig.push_back(static_cast<int>(model::intent_index(e.intent)));
      if (e.intent != corpus::Intent::kCommercial) continue;
      cp.push_back(p.categories);
      cg.push_back(e.categories);
    }
    std::vector<int> classes(m.config().categories);
    for (std::size_t k = 0; k < classes.size(); ++k) classes[k] = static_cast<int>(k);
    rows.push_back(to_scores("tfidf_svm", {eval::count(ip, ig, {0, 1}), eval::count(cp, cg, classes)}));
  }
  eval::write_results_tsv(rows, dir / "metrics.tsv");
  eval::write_results_tsv(rows, std::cout);
}

// ------------------------------------------------------------------- predict

struct PredictArgs {
  Common common;
  std::string model_dir;
  std::string input;
  std::vector<std::string> queries;
};

void run_predict(const PredictArgs& a, const OptionSet& opts) {
  const auto m = model::load_checkpoint(fs::path(a.model_dir) / kModelFile);
  const auto dir = prepare_out(a.common, opts, "predict");
  std::vector<std::string> texts = a.queries;
  if (!a.input.empty()) {
    std::ifstream in(a.input, std::ios::binary);
    if (!in) throw FileError("cannot read " + a.input);
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) texts.push_back(line);
    }
  }
  if (texts.empty()) throw InputError("no queries given (use --query or --input)");

  std::string out = "query\tintent\tcategories\tcommercial_probability\tcategory_probabilities\n";
  char buf[32];
  for (const auto& text : texts) {
    if (text.find('\t') != std::string::npos) throw InputError("query contains a tab");
    const auto p = m.predict(tokenize(text));
    std::vector<std::string> probs;
    for (double v : p.category_probabilities) {
      std::snprintf(buf, sizeof buf, "%.6f", v);
      probs.emplace_back(buf);
    }
    std::snprintf(buf, sizeof buf, "%.6f", p.commercial_probability);
    out += text + '\t' + corpus::intent_name(p.intent) + '\t' +
           corpus::format_category_ids(p.categories) + '\t' + buf + '\t' + join(probs, ",") + '\n';
  }
  write_text(dir / "predictions.tsv", out);
  std::cout << out;
}

// -------------------------------------------------------------- config file

std::string json_scalar(const json& v, const std::string& key) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number()) return v.dump();
  throw ConfigError("config key '" + key + "' must be a scalar");
}

bool given_on_command_line(const std::vector<std::string>& args, const std::string& flag) {
  return std::any_of(args.begin(), args.end(), [&](const std::string& a) {
    return a == flag || a.rfind(flag + "=", 0) == 0;
  });
}

// Splices --key value pairs from a --config JSON file into the argument
// list for every key not already given as a flag.
std::vector<std::string> expand_config(std::vector<std::string> args) {
  std::string path;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (path.empty() || args.size() < 2) return args;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileError("cannot read " + path);
  json cfg;
  try {
    cfg = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(fs::path(path).filename().string(), 1, e.what());
  }
  if (!cfg.is_object()) throw ConfigError("config file must hold a JSON object");
  if (cfg.contains("command") && cfg["command"] != args[1]) {
    throw ConfigError("config was written by '" + cfg["command"].get<std::string>() +
                      "', not '" + args[1] + "'");
  }
  std::vector<std::string> extra;
  for (const auto& [key, value] : cfg.items()) {
    if (key == "command" || key == "config") continue;
    const std::string flag = "--" + key;
    if (given_on_command_line(args, flag)) continue;
    if (value.is_array()) {
      for (const auto& item : value) {
        extra.push_back(flag);
        extra.push_back(json_scalar(item, key));
      }
      continue;
    }
    extra.push_back(flag);
    extra.push_back(json_scalar(value, key));
  }
  args.insert(args.begin() + 2, extra.begin(), extra.end());
  return args;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"JointMap query intent and product category mapping"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* gen_cmd = app.add_subcommand("generate-corpus", "Write a synthetic corpus");
  OptionSet gen_opts(gen_cmd);
  add_common(gen_opts, gen.common);
  gen_opts.add("categories", gen.corpus.categories, "Number of categories");
  gen_opts.add("vocabulary", gen.corpus.vocabulary_size, "Vocabulary size");
  gen_opts.add("queries", gen.corpus.queries, "Number of queries");
  gen_opts.add("noncommercial", gen.corpus.noncommercial_fraction, "Non-commercial fraction");
  gen_opts.add("skew", gen.corpus.skew_exponent, "Category frequency skew exponent");
  gen_opts.add("ambiguity", gen.corpus.ambiguity_rate, "Near-boundary query rate");
  gen_opts.add("click-noise", gen.corpus.click_noise, "Probability of an off-topic click");

  BuildArgs build;
  auto* build_cmd = app.add_subcommand("build-datasets", "Label queries from seeds and clicks");
  OptionSet build_opts(build_cmd);
  add_common(build_opts, build.common);
  build_opts.add("corpus", build.corpus_dir, "Corpus directory")->required();
  build_opts.add("seed-per-class", build.seed_per_class, "Oracle-labeled seeds per intent");
  build_opts.add("test-per-class", build.test_per_class, "Held-out queries per intent");
  build_opts.add("k", build.alg1.knn.k, "KNN neighbours");
  build_opts.add("agreement", build.alg1.knn.agreement, "KNN label agreement");
  build_opts.add("tau", build.alg1.tau, "Tricky-sample margin band");
  build_opts.add("stop-threshold", build.alg1.stop_threshold, "Held-out accuracy target");
  build_opts.add("max-iters", build.alg1.max_iters, "Active learning iterations");
  build_opts.add("relabel-budget", build.alg1.relabel_budget, "Oracle relabels per iteration");
  build_opts.add("svm-lambda", build.alg1.svm.lambda, "Scorer regularization");
  build_opts.add("svm-epochs", build.alg1.svm.epochs, "Scorer epochs");
  build_opts.add("r", build.r, "Category click-rate threshold");
  build_opts.add("oversample", build.oversample, "Target non-commercial training fraction");

  TrainArgs tr;
  tr.model.embedding_dim = 64;
  auto* train_cmd = app.add_subcommand("train", "Train JointMap and the tf*idf SVM baseline");
  OptionSet train_opts(train_cmd);
  add_common(train_opts, tr.common);
  train_opts.add("corpus", tr.corpus_dir, "Corpus directory")->required();
  train_opts.add("dataset", tr.dataset, "dataset.tsv")->required();
  train_opts.add("dim", tr.model.embedding_dim, "Embedding dimension");
  train_opts.add("query-length", tr.model.query_length, "Padded query length");
  train_opts.add("heads", tr.model.heads, "Attention heads");
  train_opts.add("gamma", tr.model.focal_gamma, "Focal loss gamma");
  train_opts.add("alpha", tr.model.focal_alpha, "Per-category focal alpha");
  train_opts.add("beta-category", tr.model.beta_category, "Category loss weight");
  train_opts.add("beta-intent", tr.model.beta_intent, "Intent loss weight");
  train_opts.add("dropout", tr.model.dropout, "Dropout rate");
  train_opts.add("threshold", tr.model.category_threshold, "Category decision threshold");
  train_opts.add("epochs", tr.train.epochs, "Training epochs");
  train_opts.add("batch-size", tr.train.batch_size, "Minibatch size");
  train_opts.add("lr", tr.train.learning_rate, "Adam learning rate");
  train_opts.add("keep-best", tr.train.keep_best, "Restore the best validation epoch");
  train_opts.add("word-vectors", tr.word_vectors, "Optional text file of word vectors");
  train_opts.add("baseline", tr.baseline, "Also train the tf*idf SVM baseline");
  train_opts.add("svm-lambda", tr.svm.lambda, "Baseline regularization");
  train_opts.add("svm-epochs", tr.svm.epochs, "Baseline epochs");

  EvalArgs ev;
  auto* eval_cmd = app.add_subcommand("eval", "Score trained models on the test split");
  OptionSet eval_opts(eval_cmd);
  add_common(eval_opts, ev.common);
  eval_opts.add("corpus", ev.corpus_dir, "Corpus directory")->required();
  eval_opts.add("dataset", ev.dataset, "dataset.tsv")->required();
  eval_opts.add("model", ev.model_dir, "Directory written by train")->required();

  PredictArgs pr;
  auto* predict_cmd = app.add_subcommand("predict", "Classify queries");
  OptionSet predict_opts(predict_cmd);
  add_common(predict_opts, pr.common);
  predict_opts.add("model", pr.model_dir, "Directory written by train")->required();
  predict_opts.add("input", pr.input, "Text file with one query per line");
  predict_opts.add("query", pr.queries, "Query text (repeatable)");

  std::string config_path;
  for (auto* sub : {gen_cmd, build_cmd, train_cmd, eval_cmd, predict_cmd}) {
    sub->add_option("--config", config_path, "JSON file of option values (e.g. a run.json)");
  }

  try {
    std::vector<std::string> args(argv, argv + argc);
    args = expand_config(std::move(args));
    std::vector<std::string> reversed(args.rbegin(), args.rend() - 1);
    try {
      app.parse(std::move(reversed));
    } catch (const CLI::CallForHelp& e) {
      return app.exit(e);
    } catch (const CLI::ParseError& e) {
      std::fprintf(stderr, "error: usage: %s\n", e.what());
      return 2;
    }
    if (gen_cmd->parsed()) run_generate(gen, gen_opts);
    if (build_cmd->parsed()) run_build(build, build_opts);
    if (train_cmd->parsed()) run_train(tr, train_opts);
    if (eval_cmd->parsed()) run_eval(ev, eval_opts);
    if (predict_cmd->parsed()) run_predict(pr, predict_opts);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s: %s\n", e.kind(), e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: internal: %s\n", e.what());
    return 1;
  }
  return 0;
}
