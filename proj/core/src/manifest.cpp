#include "gardin/manifest.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "gardin/error.hpp"
#include "gardin/parallel.hpp"

namespace gardin {

void write_manifest(const std::filesystem::path& out_dir, const std::string& command,
                    const RunConfig& cfg, const std::vector<std::string>& inputs,
                    const std::vector<std::string>& outputs) {
  const nlohmann::json m = {{"command", command},
                            {"version", kVersion},
                            {"config_hash", cfg.hash()},
                            {"seed", cfg.seed},
                            {"threads", ThreadPool::global().size()},
                            {"inputs", inputs},
                            {"outputs", outputs}};
  const auto path = out_dir / ("manifest-" + command + ".json");
  std::ofstream out(path);
  if (!out) throw IoError("cannot create " + path.string());
  out << m.dump(2) << "\n";
}

}  // namespace gardin
