#include "jointmap/datasets/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "jointmap/error.hpp"

namespace jointmap::datasets {

LabeledDataset oversample_minority(const LabeledDataset& ds, double target_ratio,
                                   numerics::Rng& rng) {
  if (!(target_ratio >= 0.0 && target_ratio < 1.0)) {
    throw ConfigError("oversampling target ratio must lie in [0, 1)");
  }
  const bool any_train = ds.count(Split::kTrain) > 0;
  const Split population = any_train ? Split::kTrain : Split::kUnassigned;

  std::vector<std::size_t> minority;
  std::size_t total = 0;
  for (std::size_t i = 0; i < ds.records.size(); ++i) {
    const auto& r = ds.records[i];
    if (r.split != population) continue;
    ++total;
    if (r.intent == Intent::kNonCommercial) minority.push_back(i);
  }
  if (minority.empty() || minority.size() == total) {
    throw ConfigError("oversampling needs both intents among the training records");
  }

  // Smallest m with (minority + m) / (total + m) >= target_ratio.
  const auto n_min = static_cast<double>(minority.size());
  const auto n_all = static_cast<double>(total);
  std::size_t extra = 0;
  if (n_min < target_ratio * n_all) {
    extra = static_cast<std::size_t>(
        std::max(0.0, std::ceil((target_ratio * n_all - n_min) / (1.0 - target_ratio) - 1e-9)));
    while ((n_min + static_cast<double>(extra)) < target_ratio * (n_all + static_cast<double>(extra))) {
      ++extra;
    }
  }

  LabeledDataset out = ds;
  std::int64_t next_id = ds.max_record_id() + 1;
  for (std::size_t k = 0; k < extra; ++k) {
    LabeledRecord copy = ds.records[minority[rng.uniform_index(minority.size())]];
    copy.record_id = next_id++;
    copy.provenance = Provenance::kOversampled;
    out.records.push_back(std::move(copy));
  }
  return out;
}

LabeledDataset split_dataset(const LabeledDataset& ds, std::uint64_t seed) {
  if (ds.size() < 10) throw ConfigError("need at least 10 records to split");
  numerics::Rng rng(seed);
  LabeledDataset out = ds;
  for (Intent stratum : {Intent::kCommercial, Intent::kNonCommercial}) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < out.records.size(); ++i) {
      if (out.records[i].intent == stratum) members.push_back(i);
    }
    std::sort(members.begin(), members.end(), [&](std::size_t a, std::size_t b) {
      return out.records[a].record_id < out.records[b].record_id;
    });
    rng.shuffle(std::span<std::size_t>(members));
    // Cumulative rounding keeps each split within one record of its quota.
    const double n = static_cast<double>(members.size());
    const auto train_end = static_cast<std::size_t>(std::floor(0.7 * n + 0.5));
    const auto val_end = static_cast<std::size_t>(std::floor(0.8 * n + 0.5));
    for (std::size_t k = 0; k < members.size(); ++k) {
      out.records[members[k]].split =
          k < train_end ? Split::kTrain : (k < val_end ? Split::kVal : Split::kTest);
    }
  }
  return out;
}

}  // namespace jointmap::datasets
