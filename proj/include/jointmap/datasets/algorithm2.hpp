#pragma once

#include <map>
#include <vector>

#include "jointmap/corpus/corpus.hpp"
#include "jointmap/datasets/labeled_dataset.hpp"

namespace jointmap::datasets {

struct CategoryClicks {
  std::int64_t total_clicks = 0;
  // Clicks on products belonging to each category. A product in several
  // categories counts toward each of them.
  std::map<CategoryId, std::int64_t> per_category;
};

// Per-query click aggregation. Throws LookupError for unknown pids.
std::map<QueryId, CategoryClicks> aggregate_clicks(const corpus::ClickLog& clicks,
                                                   const corpus::Taxonomy& taxonomy);

struct Algorithm2Result {
  LabeledDataset dataset;
  std::size_t dropped_zero_clicks = 0;
  std::size_t dropped_empty = 0;
};

// Click-rate category labeling: a query gets every category whose share of
// the query's clicks exceeds r. Queries without clicks or without any
// category above r are dropped and counted. Throws ConfigError unless
// 0 <= r <= 1.
Algorithm2Result algorithm2_run(const std::vector<PoolQuery>& queries,
                                const corpus::ClickLog& clicks, const corpus::Taxonomy& taxonomy,
                                double r);

}  // namespace jointmap::datasets
