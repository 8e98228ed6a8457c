#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <sys/wait.h>

using std::filesystem::path;

namespace {

path cli_binary() {
  const char* env = std::getenv("GARDIN_CLI");
  REQUIRE_MESSAGE(env != nullptr, "GARDIN_CLI must point at the gardin binary");
  return env;
}

path work_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "gardin_cli_test" / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

int run_cli(const std::string& args, const path& log) {
  const std::string cmd =
      "\"" + cli_binary().string() + "\" " + args + " >" + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  return WIFEXITED(status) ? WEXITSTATUS(status) : -2;
}

std::string slurp(const path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

path tiny_config(const path& dir, const std::string& name, const std::string& extra = {}) {
  const auto cfg = dir / name;
  std::ofstream out(cfg);
  out << "synth.frame_w = 96\n"
         "synth.frame_h = 72\n"
         "synth.train_videos = 1\n"
         "synth.test_videos = 2\n"
         "synth.frames_per_video = 28\n"
         "synth.sprites_per_video = 2\n"
         "synth.anomaly_duration = 10\n"
         "gardin.epochs = 1\n"
         "gardin.batch = 16\n"
         "gardin.lr = 2e-4\n"
         "gardin.probe_size = 8\n"
         "alrec.epochs = 2\n"
         "alrec.batch = 64\n"
      << extra;
  return cfg;
}

}  // namespace

TEST_CASE("cli: no subcommand fails, --version succeeds") {
  const auto dir = work_dir("basic");
  CHECK(run_cli("", dir / "none.log") != 0);
  CHECK(run_cli("--version", dir / "ver.log") == 0);
}

TEST_CASE("cli synth: refusal without --force, determinism with same seed") {
  const auto dir = work_dir("synth");
  const auto cfg = tiny_config(dir, "synth.cfg");
  const auto ds1 = dir / "ds1";
  const auto ds2 = dir / "ds2";
  CHECK(run_cli("synth --config " + cfg.string() + " --seed 5 --out " + ds1.string(),
                dir / "s1.log") == 0);
  CHECK(std::filesystem::exists(ds1 / "train/video_000/frame_000000.png"));
  CHECK(std::filesystem::exists(ds1 / "event_log.json"));
  CHECK(std::filesystem::exists(ds1 / "manifest-synth.json"));

  // non-empty output without --force is refused (config error)
  CHECK(run_cli("synth --config " + cfg.string() + " --seed 5 --out " + ds1.string(),
                dir / "s2.log") == 2);
  CHECK(run_cli("synth --config " + cfg.string() + " --seed 5 --out " + ds1.string() + " --force",
                dir / "s3.log") == 0);

  CHECK(run_cli("synth --config " + cfg.string() + " --seed 5 --out " + ds2.string(),
                dir / "s4.log") == 0);
  for (const auto& entry : std::filesystem::recursive_directory_iterator(ds1)) {
    if (!entry.is_regular_file()) continue;
    const auto rel = std::filesystem::relative(entry.path(), ds1);
    CHECK_MESSAGE(slurp(entry.path()) == slurp(ds2 / rel), "differs: ", rel.string());
  }
}

TEST_CASE("cli: missing upstream artifacts exit with code 3") {
  const auto dir = work_dir("missing");
  const auto cfg = tiny_config(dir, "nods.cfg", "dataset.root = " + (dir / "nope").string() + "\n");
  CHECK(run_cli("train-gardin --config " + cfg.string() + " --out " + (dir / "out").string(),
                dir / "tg.log") == 3);
  // dataset exists but no checkpoints / scores yet
  const auto ds = dir / "ds";
  const auto cfg2 = tiny_config(dir, "synth.cfg");
  REQUIRE(run_cli("synth --config " + cfg2.string() + " --seed 5 --out " + ds.string(),
                  dir / "sy.log") == 0);
  const auto cfg3 = tiny_config(dir, "with_ds.cfg", "dataset.root = " + ds.string() + "\n");
  CHECK(run_cli("train-alrec --config " + cfg3.string() + " --out " + (dir / "out").string(),
                dir / "ta.log") == 3);
  CHECK(run_cli("score --config " + cfg3.string() + " --out " + (dir / "out").string(),
                dir / "sc.log") == 3);
  CHECK(run_cli("eval --config " + cfg3.string() + " --out " + (dir / "out").string(),
                dir / "ev.log") == 3);
}

TEST_CASE("cli: bad config exits with code 2") {
  const auto dir = work_dir("badcfg");
  std::ofstream(dir / "bad.cfg") << "gardin.epochz = 5\n";
  CHECK(run_cli("train-gardin --config " + (dir / "bad.cfg").string(), dir / "b.log") == 2);
}

TEST_CASE("cli micro pipeline: synth, train both stages, score, eval") {
  const auto dir = work_dir("pipeline");
  const auto ds = dir / "ds";
  const auto out = dir / "out";
  const auto cfg_synth = tiny_config(dir, "synth.cfg");
  REQUIRE(run_cli("synth --config " + cfg_synth.string() + " --seed 3 --out " + ds.string(),
                  dir / "p0.log") == 0);
  const auto cfg = tiny_config(dir, "run.cfg", "dataset.root = " + ds.string() + "\n");

  CHECK(run_cli("train-gardin --config " + cfg.string() + " --seed 3 --out " + out.string(),
                dir / "p1.log") == 0);
  CHECK(std::filesystem::exists(out / "gardin_checkpoint.bin"));
  CHECK(std::filesystem::exists(out / "gardin_loss_log.csv"));
  CHECK(std::filesystem::exists(out / "gardin_summary.json"));
  CHECK(std::filesystem::exists(out / "manifest-train-gardin.json"));
  {
    std::ifstream log(out / "gardin_loss_log.csv");
    std::string line;
    int rows = 0;
    std::getline(log, line);  // header
    CHECK(line.rfind("epoch,lr,", 0) == 0);
    while (std::getline(log, line))
      if (!line.empty()) ++rows;
    CHECK(rows == 1);  // one epoch
  }

  CHECK(run_cli("train-alrec --config " + cfg.string() + " --seed 3 --out " + out.string(),
                dir / "p2.log") == 0);
  CHECK(std::filesystem::exists(out / "alrec_checkpoint.bin"));
  CHECK(std::filesystem::exists(out / "pmsre_train.csv"));

  CHECK(run_cli("score --config " + cfg.string() + " --seed 3 --out " + out.string(),
                dir / "p3.log") == 0);
  CHECK(std::filesystem::exists(out / "scores.csv"));
  CHECK(std::filesystem::exists(out / "pmsre_test.csv"));

  CHECK(run_cli("eval --config " + cfg.string() + " --seed 3 --out " + out.string(),
                dir / "p4.log") == 0);
  CHECK(std::filesystem::exists(out / "auc.json"));
  const std::string report = slurp(dir / "p4.log");
  CHECK(report.find("\"auc\":") != std::string::npos);
  CHECK(report.find("\"n_videos\":2") != std::string::npos);
}

TEST_CASE("cli eval: single-class ground truth exits with code 4") {
  const auto dir = work_dir("singleclass");
  const auto ds = dir / "ds";
  // no anomaly kinds -> all labels zero
  const auto cfg_synth = tiny_config(dir, "synth.cfg", "synth.anomaly_kinds =\n");
  REQUIRE(run_cli("synth --config " + cfg_synth.string() + " --seed 4 --out " + ds.string(),
                  dir / "e0.log") == 0);
  const auto out = dir / "out";
  std::filesystem::create_directories(out);
  // hand-written scores matching the 2 test videos x 28 frames
  std::ofstream scores(out / "scores.csv");
  scores << "video_id,frame,score_raw,score_final\n";
  for (const char* vid : {"video_000", "video_001"})
    for (int f = 0; f < 28; ++f)
      scores << vid << "," << f << "," << (f % 7) * 0.1 << "," << (f % 7) * 0.1 << "\n";
  scores.close();
  const auto cfg = tiny_config(dir, "ev.cfg", "dataset.root = " + ds.string() + "\n");
  CHECK(run_cli("eval --config " + cfg.string() + " --out " + out.string(),
                dir / "e1.log") == 4);
}
