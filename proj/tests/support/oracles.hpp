#pragma once

// Independent reference implementations used by the unit and acceptance
// tests. They share no code with the library beyond its plain data types.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "jointmap/baseline/sparse.hpp"
#include "jointmap/corpus/corpus.hpp"

namespace oracle {

using Rational = boost::multiprecision::cpp_rational;

struct F1Pair {
  double macro;
  double micro;
};

// Macro/micro F1 straight from label sets, in exact arithmetic.
inline F1Pair f1_from_sets(const std::vector<std::vector<int>>& predicted,
                           const std::vector<std::vector<int>>& gold,
                           const std::vector<int>& classes) {
  Rational macro = 0;
  long long all_tp = 0, all_fp = 0, all_fn = 0;
  for (int c : classes) {
    long long tp = 0, fp = 0, fn = 0;
    for (std::size_t r = 0; r < gold.size(); ++r) {
      const bool p = std::count(predicted[r].begin(), predicted[r].end(), c) > 0;
      const bool g = std::count(gold[r].begin(), gold[r].end(), c) > 0;
      tp += p && g;
      fp += p && !g;
      fn += !p && g;
    }
    all_tp += tp;
    all_fp += fp;
    all_fn += fn;
    if (2 * tp + fp + fn > 0) macro += Rational(2 * tp, 2 * tp + fp + fn);
  }
  if (!classes.empty()) macro /= static_cast<long long>(classes.size());
  const long long denom = 2 * all_tp + all_fp + all_fn;
  const Rational micro = denom == 0 ? Rational(0) : Rational(2 * all_tp, denom);
  return {static_cast<double>(macro), static_cast<double>(micro)};
}

struct Alg2Row {
  jointmap::corpus::QueryId query;
  std::vector<jointmap::corpus::CategoryId> categories;
};

struct Alg2Outcome {
  std::vector<Alg2Row> kept;
  std::size_t zero_clicks = 0;
  std::size_t empty = 0;
};

// The decimal a user typed for a double: the shortest representation that
// round-trips, read back as an exact rational. 0.3 becomes 3/10 rather than
// the binary value just below it.
inline Rational shortest_decimal(double r) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, r, std::chars_format::fixed);
  const std::string text(buf, res.ptr);
  const auto dot = text.find('.');
  if (dot == std::string::npos) return Rational(boost::multiprecision::cpp_int(text));
  std::string digits = text.substr(0, dot) + text.substr(dot + 1);
  // A leading zero would make the parser read octal.
  digits.erase(0, std::min(digits.find_first_not_of('0'), digits.size() - 1));
  boost::multiprecision::cpp_int denom = 1;
  for (std::size_t i = dot + 1; i < text.size(); ++i) denom *= 10;
  return Rational(boost::multiprecision::cpp_int(digits), denom);
}

// Click-rate labeling with exact rational rates, against the threshold as
// its shortest decimal.
inline Alg2Outcome algorithm2(const std::vector<jointmap::corpus::QueryId>& queries,
                              const jointmap::corpus::ClickLog& clicks,
                              const jointmap::corpus::Taxonomy& taxonomy, double r) {
  const Rational threshold = shortest_decimal(r);

  Alg2Outcome out;
  for (auto q : queries) {
    long long total = 0;
    std::map<jointmap::corpus::CategoryId, long long> per;
    for (const auto& rec : clicks) {
      if (rec.query != q) continue;
      total += rec.count;
      for (const auto& p : taxonomy.products()) {
        if (p.pid != rec.pid) continue;
        for (auto c : p.categories) per[c] += rec.count;
      }
    }
    if (total == 0) {
      ++out.zero_clicks;
      continue;
    }
    Alg2Row row{q, {}};
    for (const auto& [c, n] : per) {
      if (Rational(n, total) > threshold) row.categories.push_back(c);
    }
    if (row.categories.empty()) {
      ++out.empty;
      continue;
    }
    out.kept.push_back(std::move(row));
  }
  return out;
}

struct Ranked {
  std::size_t id;
  double distance;
};

// Dense brute-force cosine-distance ranking, ties by ascending id.
inline std::vector<Ranked> knn_brute_force(const std::vector<jointmap::baseline::SparseVector>& docs,
                                           const jointmap::baseline::SparseVector& q,
                                           std::size_t k, std::size_t dimension) {
  const auto dense = [dimension](const jointmap::baseline::SparseVector& v) {
    std::vector<double> d(dimension, 0.0);
    for (std::size_t i = 0; i < v.indices.size(); ++i) d[v.indices[i]] = v.values[i];
    return d;
  };
  const auto qd = dense(q);
  double qn = 0;
  for (double x : qd) qn += x * x;
  qn = std::sqrt(qn);
  std::vector<Ranked> all;
  for (std::size_t id = 0; id < docs.size(); ++id) {
    const auto dd = dense(docs[id]);
    double dot = 0, dn = 0;
    for (std::size_t t = 0; t < dimension; ++t) {
      dot += qd[t] * dd[t];
      dn += dd[t] * dd[t];
    }
    dn = std::sqrt(dn);
    const double sim = (qn * dn) > 0 ? dot / (qn * dn) : 0.0;
    all.push_back({id, 1.0 - sim});
  }
  std::stable_sort(all.begin(), all.end(),
                   [](const Ranked& a, const Ranked& b) { return a.distance < b.distance; });
  all.resize(std::min(k, all.size()));
  return all;
}

}  // namespace oracle
