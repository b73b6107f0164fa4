#pragma once

#include <filesystem>

#include "jointmap/model/jointmap_model.hpp"

namespace jointmap::model {

// Binary checkpoint: magic "JMAP1", every ModelConfig field, the vocabulary,
// then each parameter matrix in declaration order (name, rows, cols,
// values). Numbers are little-endian; reals are 64-bit.
void save_checkpoint(const JointMapModel& model, const std::filesystem::path& path);
JointMapModel load_checkpoint(const std::filesystem::path& path);

}  // namespace jointmap::model
