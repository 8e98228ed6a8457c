#include <doctest.h>

#include <cmath>

#include "gardin/alrec.hpp"
#include "gardin/error.hpp"
#include "gardin/rng.hpp"

using namespace gardin;

namespace {

std::vector<PmsreVector> fake_normal_vectors(int n, Rng& rng) {
  std::vector<PmsreVector> out(static_cast<size_t>(n));
  for (auto& v : out)
    for (auto& e : v.e) e = 0.002 + 0.004 * rng.uniform();  // tight normal cluster
  return out;
}

}  // namespace

TEST_CASE("focal loss values") {
  const FocalLossParams defaults;  // alpha 0.1, gamma 10
  CHECK(focal_loss(1.0 - 1e-7, defaults) < 1e-60);
  const double expected = 0.1 * std::pow(0.5, 10.0) * std::log(2.0);
  CHECK(std::abs(focal_loss(0.5, defaults) - expected) < 1e-15);
  CHECK(std::abs(focal_loss(0.5, defaults) - 6.769e-5) < 1e-9);
  CHECK(focal_loss(0.5, {1.0, 0.0}) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK_THROWS_AS(focal_loss(0.5, {0.0, 1.0}), ValidationError);
  CHECK_THROWS_AS(focal_loss(0.5, {1.0, -1.0}), ValidationError);
}

TEST_CASE("focal loss with gamma=0, alpha=1 is exactly cross-entropy") {
  Rng rng(1);
  const FocalLossParams ce{1.0, 0.0};
  for (int i = 0; i < 1000; ++i) {
    const double p = 1e-6 + (1.0 - 2e-6) * rng.uniform();
    CHECK(std::abs(focal_loss(p, ce) - (-std::log(p))) <= 1e-9);
    // the two objective terms of the discriminator reduce to the standard
    // GAN cross-entropy pair
    CHECK(std::abs(focal_loss(1.0 - p, ce) - (-std::log(1.0 - p))) <= 1e-9);
  }
}

TEST_CASE("focal loss is strictly decreasing in p") {
  Rng rng(2);
  const FocalLossParams fl{0.1, 10.0};
  for (int i = 0; i < 500; ++i) {
    double p1 = 1e-6 + (1.0 - 2e-6) * rng.uniform();
    double p2 = 1e-6 + (1.0 - 2e-6) * rng.uniform();
    if (p1 == p2) continue;
    if (p1 > p2) std::swap(p1, p2);
    CHECK(focal_loss(p1, fl) > focal_loss(p2, fl));
  }
}

TEST_CASE("discriminator outputs stay in (0,1) for arbitrary finite vectors") {
  ClassifierModel model;
  model.init_weights(33);
  Rng rng(3);
  for (int rep = 0; rep < 50; ++rep) {
    PmsreVector e;
    for (auto& v : e.e) v = rng.normal() * 50.0;  // far outside [0,1]
    const double s = score_region(model, e);
    CHECK(s >= 0.0);
    CHECK(s <= 1.0);
    CHECK(std::isfinite(s));
  }
  PmsreVector bad;
  bad.e[3] = std::nan("");
  CHECK_THROWS_AS(score_region(model, bad), ValidationError);
}

TEST_CASE("score_region is 1 - D(e), via saturated-bias stubs") {
  // a discriminator forced to output ~1 scores the region as fully normal
  ClassifierModel model;
  model.init_weights(44);
  auto params = model.discriminator_params();
  nn::Tensor<float>* final_bias = nullptr;
  for (auto& p : params)
    if (p.name == "disc.fc5.b") final_bias = p.value;
  REQUIRE(final_bias != nullptr);
  REQUIRE(final_bias->size() == 1);

  final_bias->v[0] = 40.0f;  // sigmoid saturates to 1
  PmsreVector e{};
  CHECK(score_region(model, e) == 0.0);
  final_bias->v[0] = -40.0f;  // sigmoid saturates to 0
  CHECK(score_region(model, e) == 1.0);

  // determinism: dropout is disabled at inference
  final_bias->v[0] = 0.3f;
  for (auto& v : e.e) v = 0.01;
  CHECK(score_region(model, e) == score_region(model, e));
}

TEST_CASE("training: bookkeeping, checkpoint, determinism") {
  Rng rng(7);
  const auto vectors = fake_normal_vectors(100, rng);
  AlrecTrainConfig cfg;
  cfg.epochs = 2;
  cfg.batch = 32;

  const AlrecTrainResult r1 = train_alrec(vectors, cfg, FocalLossParams{}, 5);
  REQUIRE(r1.log.size() == 2);
  CHECK(r1.log[0].epoch == 0);
  for (const auto& row : r1.log) {
    CHECK(std::isfinite(row.loss_d));
    CHECK(std::isfinite(row.loss_g));
    CHECK(row.mean_d_real >= 0.0);
    CHECK(row.mean_d_real <= 1.0);
  }

  const AlrecTrainResult r2 = train_alrec(vectors, cfg, FocalLossParams{}, 5);
  for (size_t i = 0; i < r1.log.size(); ++i) {
    CHECK(r1.log[i].loss_d == r2.log[i].loss_d);
    CHECK(r1.log[i].loss_g == r2.log[i].loss_g);
  }
  const AlrecTrainResult r3 = train_alrec(vectors, cfg, FocalLossParams{}, 6);
  bool differs = false;
  for (size_t i = 0; i < r1.log.size(); ++i) differs |= r1.log[i].loss_d != r3.log[i].loss_d;
  CHECK(differs);

  CHECK_THROWS_AS(train_alrec({}, cfg, FocalLossParams{}, 1), ValidationError);
}
