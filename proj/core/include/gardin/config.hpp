#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "gardin/alrec.hpp"
#include "gardin/dataset.hpp"
#include "gardin/gardin.hpp"
#include "gardin/synthetic.hpp"

namespace gardin {

/// Flat `section.key = value` document; '#' starts a comment. Unknown keys
/// are rejected so typos cannot silently fall back to defaults.
class KeyValues {
 public:
  static KeyValues from_file(const std::filesystem::path& path);
  static KeyValues from_string(const std::string& text, const std::string& origin = "<config>");

  std::string get_string(const std::string& key, const std::string& def);
  int get_int(const std::string& key, int def);
  double get_double(const std::string& key, double def);
  uint64_t get_u64(const std::string& key, uint64_t def);

  /// Keys present in the document that no getter consumed.
  std::vector<std::string> unconsumed() const;

 private:
  std::map<std::string, std::string> values_;
  std::map<std::string, bool> consumed_;
  std::string origin_;
};

/// Everything a run needs; defaults reproduce the reference hyperparameters,
/// so an empty config file is a valid full configuration.
struct RunConfig {
  uint64_t seed = 1;
  std::filesystem::path dataset_root;
  std::filesystem::path out_dir;

  SamplingConfig sampling;
  SynthSpec synth;
  GardinTrainConfig gardin;
  AlrecTrainConfig alrec;
  FocalLossParams focal;
  double score_sigma = 10.0;
  int ablate_gardin_epochs = 0;  // 0: inherit gardin.epochs
  int ablate_alrec_epochs = 0;

  /// Loads the file (may be empty path = all defaults) and applies CLI
  /// overrides. Throws ParseError/ValidationError on bad content.
  static RunConfig load(const std::filesystem::path& config_path,
                        std::optional<uint64_t> seed_override,
                        std::optional<std::filesystem::path> out_override);

  /// Canonical `key=value` listing of the effective configuration.
  std::string canonical_string() const;
  /// SHA-256 of canonical_string(); recorded in every run manifest.
  std::string hash() const;
};

}  // namespace gardin
