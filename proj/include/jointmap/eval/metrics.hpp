#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "jointmap/numerics/random.hpp"

namespace jointmap::eval {

struct ClassCounts {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;
};

struct PerClassCounts {
  std::vector<int> classes;
  std::vector<ClassCounts> counts;  // parallel to classes
  std::size_t records = 0;

  // Throws InputError for a class outside the set.
  const ClassCounts& at(int cls) const;
};

// Multi-label counting, per (record, class) membership. Throws InputError on
// length mismatch or a label outside `classes`.
PerClassCounts count(const std::vector<std::vector<int>>& predicted,
                     const std::vector<std::vector<int>>& gold, const std::vector<int>& classes);
// Single-label counting: each record contributes one predicted and one gold
// label.
PerClassCounts count(const std::vector<int>& predicted, const std::vector<int>& gold,
                     const std::vector<int>& classes);

// 2TP / (2TP + FP + FN), with 0/0 defined as 0.
double f1(const ClassCounts& c);
double f1_macro(const PerClassCounts& counts);
double f1_micro(const PerClassCounts& counts);
// Macro F1 restricted to `minority`. Throws InputError for unknown classes.
double minority_report(const PerClassCounts& counts, const std::vector<int>& minority);

// The k classes with the fewest occurrences in `support` (ties by id).
// Classes missing from `support` count as zero.
std::vector<int> lowest_support_classes(const std::map<int, std::size_t>& support,
                                        const std::vector<int>& classes, std::size_t k);

struct MethodScores {
  std::string method;
  double intent_macro = 0.0;
  double intent_micro = 0.0;
  double category_macro = 0.0;
  double category_micro = 0.0;
};

// Method x {macro, micro} x {intent, category}, fixed 4-decimal formatting.
void write_results_tsv(const std::vector<MethodScores>& rows, std::ostream& out);
void write_results_tsv(const std::vector<MethodScores>& rows, const std::filesystem::path& path);

struct BootstrapResult {
  double observed_difference = 0.0;  // macro F1 of a minus b
  // Fraction of resamples in which a does not beat b.
  double p_value = 1.0;
};

// Paired bootstrap over records for the difference in macro F1 between two
// systems' multi-label predictions against shared gold labels.
BootstrapResult paired_bootstrap(const std::vector<std::vector<int>>& predicted_a,
                                 const std::vector<std::vector<int>>& predicted_b,
                                 const std::vector<std::vector<int>>& gold,
                                 const std::vector<int>& classes, std::size_t resamples,
                                 numerics::Rng& rng);

}  // namespace jointmap::eval
