#include "jointmap/eval/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

#include "jointmap/error.hpp"

namespace jointmap::eval {

namespace {

std::size_t class_index(const std::vector<int>& classes, int cls) {
  const auto it = std::find(classes.begin(), classes.end(), cls);
  if (it == classes.end()) throw InputError("label " + std::to_string(cls) + " is not a known class");
  return static_cast<std::size_t>(it - classes.begin());
}

}  // namespace

const ClassCounts& PerClassCounts::at(int cls) const { return counts[class_index(classes, cls)]; }

PerClassCounts count(const std::vector<std::vector<int>>& predicted,
                     const std::vector<std::vector<int>>& gold, const std::vector<int>& classes) {
  if (predicted.size() != gold.size()) {
    throw InputError("prediction count " + std::to_string(predicted.size()) +
                     " differs from gold count " + std::to_string(gold.size()));
  }
  PerClassCounts out;
  out.classes = classes;
  out.counts.assign(classes.size(), {});
  out.records = gold.size();
  std::vector<char> in_pred(classes.size()), in_gold(classes.size());
  for (std::size_t r = 0; r < gold.size(); ++r) {
    std::fill(in_pred.begin(), in_pred.end(), 0);
    std::fill(in_gold.begin(), in_gold.end(), 0);
    for (int c : predicted[r]) in_pred[class_index(classes, c)] = 1;
    for (int c : gold[r]) in_gold[class_index(classes, c)] = 1;
    for (std::size_t k = 0; k < classes.size(); ++k) {
      if (in_pred[k] && in_gold[k]) ++out.counts[k].tp;
      else if (in_pred[k]) ++out.counts[k].fp;
      else if (in_gold[k]) ++out.counts[k].fn;
    }
  }
  return out;
}

PerClassCounts count(const std::vector<int>& predicted, const std::vector<int>& gold,
                     const std::vector<int>& classes) {
  if (predicted.size() != gold.size()) {
    throw InputError("prediction count " + std::to_string(predicted.size()) +
                     " differs from gold count " + std::to_string(gold.size()));
  }
  std::vector<std::vector<int>> p, g;
  p.reserve(predicted.size());
  g.reserve(gold.size());
  for (int x : predicted) p.push_back({x});
  for (int x : gold) g.push_back({x});
  return count(p, g, classes);
}

double f1(const ClassCounts& c) {
  const auto denom = 2 * c.tp + c.fp + c.fn;
  return denom == 0 ? 0.0 : 2.0 * static_cast<double>(c.tp) / static_cast<double>(denom);
}

double f1_macro(const PerClassCounts& counts) {
  if (counts.counts.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& c : counts.counts) sum += f1(c);
  return sum / static_cast<double>(counts.counts.size());
}

double f1_micro(const PerClassCounts& counts) {
  ClassCounts total;
  for (const auto& c : counts.counts) {
    total.tp += c.tp;
    total.fp += c.fp;
    total.fn += c.fn;
  }
  return f1(total);
}

double minority_report(const PerClassCounts& counts, const std::vector<int>& minority) {
  if (minority.empty()) throw InputError("minority class list is empty");
  double sum = 0.0;
  for (int c : minority) sum += f1(counts.at(c));
  return sum / static_cast<double>(minority.size());
}

std::vector<int> lowest_support_classes(const std::map<int, std::size_t>& support,
                                        const std::vector<int>& classes, std::size_t k) {
  std::vector<std::pair<std::size_t, int>> ranked;
  for (int c : classes) {
    const auto it = support.find(c);
    ranked.emplace_back(it == support.end() ? 0 : it->second, c);
  }
  std::sort(ranked.begin(), ranked.end());
  std::vector<int> out;
  for (std::size_t i = 0; i < std::min(k, ranked.size()); ++i) out.push_back(ranked[i].second);
  return out;
}

void write_results_tsv(const std::vector<MethodScores>& rows, std::ostream& out) {
  out << "method\tintent_macro_f1\tintent_micro_f1\tcategory_macro_f1\tcategory_micro_f1\n";
  char buf[160];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "\t%.4f\t%.4f\t%.4f\t%.4f\n", r.intent_macro, r.intent_micro,
                  r.category_macro, r.category_micro);
    out << r.method << buf;
  }
}

void write_results_tsv(const std::vector<MethodScores>& rows, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FileError("cannot write " + path.string());
  write_results_tsv(rows, out);
}

BootstrapResult paired_bootstrap(const std::vector<std::vector<int>>& predicted_a,
                                 const std::vector<std::vector<int>>& predicted_b,
                                 const std::vector<std::vector<int>>& gold,
                                 const std::vector<int>& classes, std::size_t resamples,
                                 numerics::Rng& rng) {
  if (predicted_a.size() != gold.size() || predicted_b.size() != gold.size()) {
    throw InputError("paired bootstrap needs aligned predictions");
  }
  if (gold.empty() || resamples == 0) throw InputError("paired bootstrap needs data and resamples");
  BootstrapResult result;
  result.observed_difference =
      f1_macro(count(predicted_a, gold, classes)) - f1_macro(count(predicted_b, gold, classes));
  std::size_t not_better = 0;
  std::vector<std::vector<int>> ra(gold.size()), rb(gold.size()), rg(gold.size());
  for (std::size_t s = 0; s < resamples; ++s) {
    for (std::size_t i = 0; i < gold.size(); ++i) {
      const auto j = rng.uniform_index(gold.size());
      ra[i] = predicted_a[j];
      rb[i] = predicted_b[j];
      rg[i] = gold[j];
    }
    const double diff = f1_macro(count(ra, rg, classes)) - f1_macro(count(rb, rg, classes));
    if (diff <= 0.0) ++not_better;
  }
  result.p_value = static_cast<double>(not_better) / static_cast<double>(resamples);
  return result;
}

}  // namespace jointmap::eval
