#include <benchmark/benchmark.h>

#include "gardin/pmsre.hpp"
#include "gardin/rng.hpp"
#include "gardin/scoring.hpp"

using namespace gardin;

static void BM_Pmsre(benchmark::State& state) {
  Rng rng(1);
  GrayImage a(64, 64), ag(64, 64), s(64, 64), sg(64, 64);
  for (auto* img : {&a, &ag, &s, &sg})
    for (auto& v : img->data) v = rng.uniform();
  for (auto _ : state) benchmark::DoNotOptimize(pmsre(a, ag, s, sg));
}
BENCHMARK(BM_Pmsre);

static void BM_GaussianSmooth(benchmark::State& state) {
  Rng rng(2);
  FrameScoreSeries series;
  series.scores.resize(static_cast<size_t>(state.range(0)));
  for (auto& v : series.scores) v = rng.uniform();
  for (auto _ : state) {
    FrameScoreSeries copy = series;
    benchmark::DoNotOptimize(gaussian_smooth(std::move(copy), 10.0));
  }
}
BENCHMARK(BM_GaussianSmooth)->Arg(200)->Arg(2000);

static void BM_FrameLevelAuc(benchmark::State& state) {
  Rng rng(3);
  FrameScoreSeries series;
  std::vector<int> labels;
  for (int i = 0; i < state.range(0); ++i) {
    series.scores.push_back(rng.uniform());
    labels.push_back(static_cast<int>(rng.below(2)));
  }
  labels[0] = 1;
  labels[1] = 0;
  const std::vector<FrameScoreSeries> all{series};
  const std::vector<std::vector<int>> all_labels{labels};
  for (auto _ : state) benchmark::DoNotOptimize(frame_level_auc(all, all_labels));
}
BENCHMARK(BM_FrameLevelAuc)->Arg(1000)->Arg(10000);
