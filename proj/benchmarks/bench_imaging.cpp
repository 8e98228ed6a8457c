#include <benchmark/benchmark.h>

#include "gardin/imaging.hpp"
#include "gardin/rng.hpp"

using namespace gardin;

namespace {

GrayImage random_image(int h, int w, uint64_t seed) {
  Rng rng(seed);
  GrayImage img(h, w);
  for (auto& v : img.data) v = rng.uniform();
  return img;
}

}  // namespace

static void BM_Ssim64(benchmark::State& state) {
  const GrayImage a = random_image(64, 64, 1);
  const GrayImage b = random_image(64, 64, 2);
  for (auto _ : state) benchmark::DoNotOptimize(ssim(a, b));
}
BENCHMARK(BM_Ssim64);

static void BM_SsimGradient64(benchmark::State& state) {
  const GrayImage a = random_image(64, 64, 1);
  const GrayImage b = random_image(64, 64, 2);
  for (auto _ : state) benchmark::DoNotOptimize(ssim_gradient(a, b));
}
BENCHMARK(BM_SsimGradient64);

static void BM_DistanceDefaultParts(benchmark::State& state) {
  const GrayImage a = random_image(64, 64, 3);
  const GrayImage b = random_image(64, 64, 4);
  for (auto _ : state) benchmark::DoNotOptimize(distance(a, b, DistanceParts::defaults()));
}
BENCHMARK(BM_DistanceDefaultParts);

static void BM_DistanceWithGrad(benchmark::State& state) {
  const GrayImage a = random_image(64, 64, 3);
  const GrayImage b = random_image(64, 64, 4);
  for (auto _ : state) benchmark::DoNotOptimize(distance_with_grad(a, b, DistanceParts::defaults()));
}
BENCHMARK(BM_DistanceWithGrad);

static void BM_Sobel(benchmark::State& state) {
  const GrayImage a = random_image(64, 64, 5);
  for (auto _ : state) benchmark::DoNotOptimize(sobel_gradient(a));
}
BENCHMARK(BM_Sobel);

static void BM_ResizeTo64(benchmark::State& state) {
  const GrayImage a = random_image(static_cast<int>(state.range(0)),
                                   static_cast<int>(state.range(0)), 6);
  for (auto _ : state) benchmark::DoNotOptimize(resize_bilinear(a, 64, 64));
}
BENCHMARK(BM_ResizeTo64)->Arg(16)->Arg(48)->Arg(128);

BENCHMARK_MAIN();
