#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "gardin/error.hpp"
#include "gardin/rng.hpp"
#include "gardin/scoring.hpp"

using namespace gardin;

namespace {

// direct double-loop convolution with the same reflect rule
std::vector<double> smooth_bruteforce(const std::vector<double>& s, double sigma) {
  const int radius = static_cast<int>(std::ceil(4.0 * sigma));
  std::vector<double> k(static_cast<size_t>(2 * radius + 1));
  double sum = 0.0;
  for (int o = -radius; o <= radius; ++o) {
    k[static_cast<size_t>(o + radius)] = std::exp(-0.5 * o * o / (sigma * sigma));
    sum += k[static_cast<size_t>(o + radius)];
  }
  for (double& v : k) v /= sum;
  const int n = static_cast<int>(s.size());
  auto reflect = [n](int i) {
    if (n == 1) return 0;
    while (i < 0 || i >= n) {
      if (i < 0) i = -i;
      if (i >= n) i = 2 * n - 2 - i;
    }
    return i;
  };
  std::vector<double> out(s.size());
  for (int i = 0; i < n; ++i) {
    double acc = 0.0;
    for (int o = -radius; o <= radius; ++o)
      acc += k[static_cast<size_t>(o + radius)] * s[static_cast<size_t>(reflect(i + o))];
    out[static_cast<size_t>(i)] = acc;
  }
  return out;
}

// Mann-Whitney pair counting with half credit for ties
double auc_bruteforce(const std::vector<double>& scores, const std::vector<int>& labels) {
  double u = 0.0;
  int64_t pos = 0, neg = 0;
  for (size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] == 1) {
      ++pos;
      for (size_t j = 0; j < scores.size(); ++j) {
        if (labels[j] == 1) continue;
        if (scores[i] > scores[j])
          u += 1.0;
        else if (scores[i] == scores[j])
          u += 0.5;
      }
    } else {
      ++neg;
    }
  }
  return u / (static_cast<double>(pos) * static_cast<double>(neg));
}

}  // namespace

TEST_CASE("frame_scores: max per frame, empty frames = 0, identity") {
  const FrameScoreSeries s = frame_scores({{0, 0.1}, {0, 0.7}, {2, 0.3}}, 4, "v");
  CHECK(s.scores == std::vector<double>{0.7, 0.0, 0.3, 0.0});

  const FrameScoreSeries one = frame_scores({{1, 0.42}}, 3);
  CHECK(one.scores[1] == 0.42);

  CHECK_THROWS_AS(frame_scores({{4, 0.5}}, 4), ValidationError);
  CHECK_THROWS_AS(frame_scores({}, 0), ValidationError);
}

TEST_CASE("normalize_per_video: min-max, constant series, endpoints") {
  FrameScoreSeries s;
  s.scores = {0.2, 0.4, 0.6};
  const auto n = normalize_per_video(s);
  REQUIRE(n.scores.size() == 3);
  CHECK(n.scores[0] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(n.scores[1] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(n.scores[2] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(n.normalized);

  FrameScoreSeries flat;
  flat.scores = {0.3, 0.3, 0.3};
  for (double v : normalize_per_video(flat).scores) CHECK(v == 0.0);

  FrameScoreSeries spanning;
  spanning.scores = {0.0, 0.25, 1.0};
  const auto kept = normalize_per_video(spanning);
  CHECK(kept.scores.front() == 0.0);
  CHECK(kept.scores.back() == 1.0);
}

TEST_CASE("gaussian_smooth: DC preservation, impulse peak, brute-force oracle") {
  FrameScoreSeries flat;
  flat.scores.assign(200, 0.37);
  const auto sm = gaussian_smooth(flat, 10.0);
  for (double v : sm.scores) CHECK(std::abs(v - 0.37) <= 1e-12);

  FrameScoreSeries impulse;
  impulse.scores.assign(401, 0.0);
  impulse.scores[200] = 1.0;
  const auto peak = gaussian_smooth(impulse, 10.0);
  CHECK(std::abs(peak.scores[200] - 1.0 / (10.0 * std::sqrt(2.0 * M_PI))) < 1e-4);
  CHECK(peak.scores[200] == doctest::Approx(0.03989).epsilon(1e-3));

  Rng rng(5);
  for (int n : {1, 3, 17, 300}) {
    FrameScoreSeries s;
    for (int i = 0; i < n; ++i) s.scores.push_back(rng.uniform());
    const auto got = gaussian_smooth(s, 10.0);
    const auto expected = smooth_bruteforce(s.scores, 10.0);
    for (size_t i = 0; i < got.scores.size(); ++i)
      CHECK(std::abs(got.scores[i] - expected[i]) <= 1e-10);
    // smoothing is a convex combination: range cannot grow
    const double mn = *std::min_element(s.scores.begin(), s.scores.end());
    const double mx = *std::max_element(s.scores.begin(), s.scores.end());
    for (double v : got.scores) {
      CHECK(v >= mn - 1e-12);
      CHECK(v <= mx + 1e-12);
    }
  }
  CHECK_THROWS_AS(gaussian_smooth(flat, 0.0), ValidationError);
}

TEST_CASE("frame_level_auc: perfect ranking, chance, errors") {
  FrameScoreSeries s;
  s.scores = {0.9, 0.1};
  CHECK(frame_level_auc({s}, {{1, 0}}) == 1.0);

  FrameScoreSeries flat;
  flat.scores = {0.5, 0.5, 0.5, 0.5};
  CHECK(frame_level_auc({flat}, {{1, 0, 1, 0}}) == 0.5);

  CHECK_THROWS_AS(frame_level_auc({s}, {{0, 0}}), UndefinedAucError);
  CHECK_THROWS_AS(frame_level_auc({s}, {{1, 1}}), UndefinedAucError);
  CHECK_THROWS_AS(frame_level_auc({s}, {{1, 0, 1}}), ValidationError);
}

TEST_CASE("frame_level_auc equals Mann-Whitney pair counting with ties") {
  Rng rng(9);
  for (int rep = 0; rep < 50; ++rep) {
    const int n = 50 + static_cast<int>(rng.below(951));
    std::vector<double> scores(static_cast<size_t>(n));
    std::vector<int> labels(static_cast<size_t>(n));
    bool has_pos = false, has_neg = false;
    for (int i = 0; i < n; ++i) {
      // quantized scores force plenty of ties
      scores[static_cast<size_t>(i)] = std::round(rng.uniform() * 10.0) / 10.0;
      labels[static_cast<size_t>(i)] = rng.below(2);
      (labels[static_cast<size_t>(i)] ? has_pos : has_neg) = true;
    }
    if (!has_pos || !has_neg) continue;
    FrameScoreSeries s;
    s.scores = scores;
    CHECK(std::abs(frame_level_auc({s}, {labels}) - auc_bruteforce(scores, labels)) <= 1e-9);
  }
}

TEST_CASE("auc is invariant under strictly increasing transforms") {
  Rng rng(10);
  std::vector<double> scores(300);
  std::vector<int> labels(300);
  for (size_t i = 0; i < scores.size(); ++i) {
    scores[i] = rng.uniform();
    labels[i] = rng.below(2);
  }
  labels[0] = 1;
  labels[1] = 0;
  FrameScoreSeries s1, s2;
  s1.scores = scores;
  for (double v : scores) s2.scores.push_back(std::exp(3.0 * v) - 0.5);
  CHECK(frame_level_auc({s1}, {labels}) ==
        doctest::Approx(frame_level_auc({s2}, {labels})).epsilon(1e-12));
}

TEST_CASE("multi-video concatenation matches manual concatenation") {
  Rng rng(11);
  FrameScoreSeries a, b;
  std::vector<int> la, lb;
  for (int i = 0; i < 40; ++i) {
    a.scores.push_back(rng.uniform());
    la.push_back(static_cast<int>(rng.below(2)));
  }
  for (int i = 0; i < 60; ++i) {
    b.scores.push_back(rng.uniform());
    lb.push_back(static_cast<int>(rng.below(2)));
  }
  la[0] = 1;
  la[1] = 0;
  std::vector<double> cat = a.scores;
  cat.insert(cat.end(), b.scores.begin(), b.scores.end());
  std::vector<int> lcat = la;
  lcat.insert(lcat.end(), lb.begin(), lb.end());
  CHECK(frame_level_auc({a, b}, {la, lb}) == doctest::Approx(auc_bruteforce(cat, lcat)).epsilon(1e-12));
}
