// Command-line driver for the object-centric video anomaly detection
// pipeline: synthetic data generation, the two training stages, scoring
// and frame-level AUC evaluation.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>

#include "gardin/commands.hpp"
#include "gardin/error.hpp"
#include "gardin/manifest.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitMissingArtifact = 3;
constexpr int kExitNumerical = 4;

struct CommonArgs {
  std::string config_path;
  std::optional<uint64_t> seed;
  std::optional<std::string> out;
  bool force = false;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "configuration file (key = value lines)")
      ->check(CLI::ExistingFile);
  cmd->add_option("--seed", args.seed, "override the top-level seed");
  cmd->add_option("--out", args.out, "output directory");
  cmd->add_flag("--force", args.force, "overwrite non-empty output directories");
}

gardin::RunConfig load_config(const CommonArgs& args) {
  std::optional<std::filesystem::path> out;
  if (args.out) out = *args.out;
  return gardin::RunConfig::load(args.config_path, args.seed, out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"object-centric video anomaly detection (cross-domain GAN + "
               "adversarial reconstruction-error classifier)"};
  app.require_subcommand(1);
  app.set_version_flag("--version", gardin::kVersion);

  CommonArgs args;
  std::string verb;
  for (const char* name : {"synth", "train-gardin", "train-alrec", "score", "eval", "ablate"}) {
    CLI::App* cmd = app.add_subcommand(name);
    add_common(cmd, args);
    cmd->callback([&verb, name] { verb = name; });
  }
  app.get_subcommand("synth")->description("generate the synthetic moving-sprites dataset");
  app.get_subcommand("train-gardin")->description("train the cross-domain GAN on the train split");
  app.get_subcommand("train-alrec")->description("train the PMSRE classifier");
  app.get_subcommand("score")->description("score the test split region by region");
  app.get_subcommand("eval")->description("compute frame-level AUC from scores.csv");
  app.get_subcommand("ablate")->description("loss-subset and distance-combination sweeps");

  CLI11_PARSE(app, argc, argv);

  try {
    const gardin::RunConfig cfg = load_config(args);
    if (verb == "synth")
      gardin::cli::cmd_synth(cfg, args.force);
    else if (verb == "train-gardin")
      gardin::cli::cmd_train_gardin(cfg);
    else if (verb == "train-alrec")
      gardin::cli::cmd_train_alrec(cfg);
    else if (verb == "score")
      gardin::cli::cmd_score(cfg);
    else if (verb == "eval")
      gardin::cli::cmd_eval(cfg);
    else if (verb == "ablate")
      gardin::cli::cmd_ablate(cfg);
    return kExitOk;
  } catch (const gardin::MissingArtifactError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitMissingArtifact;
  } catch (const gardin::NumericsError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitNumerical;
  } catch (const gardin::UndefinedAucError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitNumerical;
  } catch (const gardin::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  }
}
