#pragma once

#include <cstdint>

#include "jointmap/datasets/labeled_dataset.hpp"
#include "jointmap/numerics/random.hpp"

namespace jointmap::datasets {

// Duplicates random non-commercial training records (with replacement)
// until they make up at least target_ratio of the training records.
// Validation and test records are untouched. If no split has been applied
// every record counts as training. Throws ConfigError unless
// 0 <= target_ratio < 1, or when the training records lack either intent.
LabeledDataset oversample_minority(const LabeledDataset& ds, double target_ratio,
                                   numerics::Rng& rng);

// Stratified 70/10/20 split by intent, deterministic under seed. Throws
// ConfigError with fewer than 10 records.
LabeledDataset split_dataset(const LabeledDataset& ds, std::uint64_t seed);

}  // namespace jointmap::datasets
