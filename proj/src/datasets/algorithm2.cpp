#include "jointmap/datasets/algorithm2.hpp"

#include "jointmap/error.hpp"

namespace jointmap::datasets {

std::map<QueryId, CategoryClicks> aggregate_clicks(const corpus::ClickLog& clicks,
                                                   const corpus::Taxonomy& taxonomy) {
  std::map<QueryId, CategoryClicks> out;
  for (const auto& rec : clicks) {
    if (rec.count < 0) throw InputError("negative click count");
    const auto& product = taxonomy.product(rec.pid);
    auto& agg = out[rec.query];
    agg.total_clicks += rec.count;
    for (CategoryId c : product.categories) agg.per_category[c] += rec.count;
  }
  return out;
}

Algorithm2Result algorithm2_run(const std::vector<PoolQuery>& queries,
                                const corpus::ClickLog& clicks, const corpus::Taxonomy& taxonomy,
                                double r) {
  if (!(r >= 0.0 && r <= 1.0)) throw ConfigError("click-rate threshold r must lie in [0, 1]");
  const auto aggregated = aggregate_clicks(clicks, taxonomy);
  Algorithm2Result result;
  std::int64_t next_id = 1;
  for (const auto& q : queries) {
    const auto it = aggregated.find(q.id);
    if (it == aggregated.end() || it->second.total_clicks == 0) {
      ++result.dropped_zero_clicks;
      continue;
    }
    const auto& agg = it->second;
    LabeledRecord rec;
    rec.query_id = q.id;
    rec.tokens = q.tokens;
    rec.intent = Intent::kCommercial;
    rec.provenance = Provenance::kClicks;
    for (const auto& [category, count] : agg.per_category) {
      const double click_rate =
          static_cast<double>(count) / static_cast<double>(agg.total_clicks);
      if (click_rate > r) rec.categories.push_back(category);
    }
    if (rec.categories.empty()) {
      ++result.dropped_empty;
      continue;
    }
    rec.record_id = next_id++;
    result.dataset.records.push_back(std::move(rec));
  }
  return result;
}

}  // namespace jointmap::datasets
