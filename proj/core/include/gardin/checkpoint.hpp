#pragma once

#include <filesystem>
#include <memory>

#include "gardin/alrec.hpp"
#include "gardin/gardin.hpp"

namespace gardin {

/// Self-describing binary container: magic + format version, a JSON header
/// with the model specs and a named-tensor index, then raw float32 data.
/// load(save(m)) reproduces bit-identical forward outputs. Corrupt,
/// truncated or version-mismatched files raise IoError; a checkpoint whose
/// tensor shapes disagree with its spec raises ValidationError naming the
/// tensor.
void save_gardin_checkpoint(const std::filesystem::path& path, GardinModel& model);
std::unique_ptr<GardinModel> load_gardin_checkpoint(const std::filesystem::path& path);

void save_alrec_checkpoint(const std::filesystem::path& path, ClassifierModel& model);
std::unique_ptr<ClassifierModel> load_alrec_checkpoint(const std::filesystem::path& path);

}  // namespace gardin
