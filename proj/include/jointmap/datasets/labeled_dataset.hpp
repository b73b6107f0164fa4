#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "jointmap/corpus/corpus.hpp"

namespace jointmap::datasets {

using corpus::CategoryId;
using corpus::Intent;
using corpus::QueryId;

enum class Split : std::uint8_t { kUnassigned, kTrain, kVal, kTest };
std::string split_name(Split s);
Split parse_split(const std::string& name);

// Where a record's intent label came from.
enum class Provenance : std::uint8_t { kSeed, kKnn, kOracle, kClicks, kOversampled };
std::string provenance_name(Provenance p);

struct LabeledRecord {
  std::int64_t record_id = 0;
  QueryId query_id = 0;
  std::vector<std::string> tokens;
  Intent intent = Intent::kCommercial;
  std::vector<CategoryId> categories;
  Split split = Split::kUnassigned;
  Provenance provenance = Provenance::kSeed;
};

struct LabeledDataset {
  std::vector<LabeledRecord> records;

  std::size_t size() const noexcept { return records.size(); }
  std::size_t count(Split s) const;
  std::size_t count(Split s, Intent intent) const;
  std::int64_t max_record_id() const;
};

// An unlabeled query available to the labeling algorithms.
struct PoolQuery {
  QueryId id = 0;
  std::vector<std::string> tokens;
};

std::vector<PoolQuery> to_pool(const std::vector<corpus::Query>& queries);

// dataset.tsv: record_id, query_id, split, intent, category_ids.
void write_dataset(const LabeledDataset& ds, const std::filesystem::path& path);
// Tokens are restored from the corpus queries; unknown query ids are a
// parse error.
LabeledDataset read_dataset(const std::filesystem::path& path,
                            const std::vector<corpus::Query>& queries);

}  // namespace jointmap::datasets
