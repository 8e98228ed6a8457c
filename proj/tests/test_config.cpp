#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "gardin/config.hpp"
#include "gardin/error.hpp"

using namespace gardin;

namespace {

std::filesystem::path write_config(const std::string& name, const std::string& content) {
  const auto dir = std::filesystem::temp_directory_path() / "gardin_config_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / name;
  std::ofstream(path) << content;
  return path;
}

}  // namespace

TEST_CASE("empty config reproduces the reference hyperparameters") {
  const RunConfig c = RunConfig::load("", std::nullopt, std::nullopt);
  CHECK(c.gardin.epochs == 200);
  CHECK(c.gardin.batch == 64);
  CHECK(c.gardin.lr0 == doctest::Approx(1e-2));
  CHECK(c.gardin.decay_every == 25);
  CHECK(c.gardin.beta1 == doctest::Approx(0.5));
  CHECK(c.gardin.beta2 == doctest::Approx(0.999));
  CHECK(c.gardin.parts.l1);
  CHECK(c.gardin.parts.l2);
  CHECK(c.gardin.parts.ss);
  CHECK_FALSE(c.gardin.parts.nr);
  CHECK(c.gardin.enabled.as);
  CHECK(c.gardin.enabled.s);
  CHECK(c.alrec.epochs == 50);
  CHECK(c.alrec.batch == 256);
  CHECK(c.alrec.lr0 == doctest::Approx(1e-4));
  CHECK(c.alrec.decay_every == 10);
  CHECK(c.focal.alpha == doctest::Approx(0.1));
  CHECK(c.focal.gamma == doctest::Approx(10.0));
  CHECK(c.sampling.temporal_spacing == 3);
  CHECK(c.sampling.min_confidence == doctest::Approx(0.3));
  CHECK(c.sampling.region_size == 64);
  CHECK(c.score_sigma == doctest::Approx(10.0));
  CHECK(c.seed == 1);
}

TEST_CASE("config file parsing with comments and overrides") {
  const auto path = write_config("ok.cfg",
                                 "# sandbox setup\n"
                                 "seed = 42\n"
                                 "gardin.epochs = 20   # desk scale\n"
                                 "gardin.distance = l1,l2\n"
                                 "gardin.losses = as,sa\n"
                                 "synth.frame_w = 96\n"
                                 "dataset.root = /tmp/ds\n");
  const RunConfig c = RunConfig::load(path, std::nullopt, std::nullopt);
  CHECK(c.seed == 42);
  CHECK(c.gardin.epochs == 20);
  CHECK_FALSE(c.gardin.parts.ss);
  CHECK(c.gardin.enabled.sa);
  CHECK_FALSE(c.gardin.enabled.a);
  CHECK(c.synth.frame_w == 96);
  CHECK(c.dataset_root == std::filesystem::path("/tmp/ds"));
  CHECK(c.alrec.epochs == 50);  // untouched default
}

TEST_CASE("seed and out-dir overrides win over the file") {
  const auto path = write_config("ovr.cfg", "seed = 7\nout.dir = /tmp/a\n");
  const RunConfig c = RunConfig::load(path, 99, std::filesystem::path("/tmp/b"));
  CHECK(c.seed == 99);
  CHECK(c.out_dir == std::filesystem::path("/tmp/b"));
}

TEST_CASE("unknown keys and malformed values are rejected") {
  CHECK_THROWS_AS(RunConfig::load(write_config("u.cfg", "gardin.epoch = 5\n"), std::nullopt,
                                  std::nullopt),
                  ParseError);
  CHECK_THROWS_AS(RunConfig::load(write_config("m.cfg", "gardin.epochs = five\n"), std::nullopt,
                                  std::nullopt),
                  ParseError);
  CHECK_THROWS_AS(RunConfig::load(write_config("d.cfg", "seed = 1\nseed = 2\n"), std::nullopt,
                                  std::nullopt),
                  ParseError);
  CHECK_THROWS_AS(RunConfig::load(write_config("n.cfg", "just text\n"), std::nullopt, std::nullopt),
                  ParseError);
}

TEST_CASE("invalid parameter combinations are rejected") {
  CHECK_THROWS_AS(RunConfig::load(write_config("r.cfg", "sampling.region_size = 32\n"),
                                  std::nullopt, std::nullopt),
                  ValidationError);
  CHECK_THROWS_AS(RunConfig::load(write_config("t.cfg", "sampling.temporal_spacing = 0\n"),
                                  std::nullopt, std::nullopt),
                  ValidationError);
  CHECK_THROWS_AS(RunConfig::load(write_config("l.cfg", "gardin.lr = -1\n"), std::nullopt,
                                  std::nullopt),
                  ValidationError);
  CHECK_THROWS_AS(RunConfig::load(write_config("g.cfg", "alrec.gamma = -2\n"), std::nullopt,
                                  std::nullopt),
                  ValidationError);
  CHECK_THROWS_AS(RunConfig::load(write_config("p.cfg", "gardin.distance = none\n"), std::nullopt,
                                  std::nullopt),
                  ValidationError);
}

TEST_CASE("config hash is stable and sensitive") {
  const RunConfig a = RunConfig::load("", std::nullopt, std::nullopt);
  const RunConfig b = RunConfig::load("", std::nullopt, std::nullopt);
  CHECK(a.hash() == b.hash());
  CHECK(a.hash().size() == 64);
  const RunConfig c = RunConfig::load("", 2, std::nullopt);
  CHECK(a.hash() != c.hash());
}
