#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "gardin/config.hpp"

namespace gardin {

inline constexpr const char* kVersion = "0.1.0";

/// Writes `<out_dir>/manifest-<command>.json` tying every produced file to
/// the configuration hash. Content is deterministic for a given run setup.
void write_manifest(const std::filesystem::path& out_dir, const std::string& command,
                    const RunConfig& cfg, const std::vector<std::string>& inputs,
                    const std::vector<std::string>& outputs);

}  // namespace gardin
