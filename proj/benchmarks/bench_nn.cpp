#include <benchmark/benchmark.h>

#include "gardin/gardin.hpp"
#include "gardin/rng.hpp"

using namespace gardin;
using nn::Tensor;

namespace {

Tensor<float> random_batch(int b, uint64_t seed) {
  Rng rng(seed);
  Tensor<float> t({b, 1, 64, 64});
  for (auto& v : t.v) v = static_cast<float>(rng.uniform());
  return t;
}

}  // namespace

static void BM_GeneratorForward(benchmark::State& state) {
  GardinModel model;
  model.init_weights(1);
  const Tensor<float> x = random_batch(static_cast<int>(state.range(0)), 2);
  for (auto _ : state) {
    detail::Generator<float>::Cache c;
    benchmark::DoNotOptimize(model.g_s.forward(x, c));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_GeneratorForward)->Arg(1)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);

static void BM_GeneratorBackward(benchmark::State& state) {
  GardinModel model;
  model.init_weights(1);
  const Tensor<float> x = random_batch(static_cast<int>(state.range(0)), 3);
  for (auto _ : state) {
    detail::Generator<float>::Cache c;
    Tensor<float> y = model.g_s.forward(x, c);
    model.g_s.backward(y, c, false);
    benchmark::DoNotOptimize(y);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_GeneratorBackward)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);

static void BM_DiscriminatorForward(benchmark::State& state) {
  GardinModel model;
  model.init_weights(1);
  const Tensor<float> x = random_batch(64, 4);
  for (auto _ : state) {
    detail::PatchDiscriminator<float>::Cache c;
    benchmark::DoNotOptimize(model.d_s.forward(x, c));
  }
  state.SetItemsProcessed(state.iterations() * 64);
}
BENCHMARK(BM_DiscriminatorForward)->Unit(benchmark::kMillisecond);

static void BM_Im2col(benchmark::State& state) {
  Rng rng(5);
  Tensor<float> x({64, 32, 32, 32});
  for (auto& v : x.v) v = static_cast<float>(rng.uniform());
  nn::ConvGeom g;
  g.in_ch = 32;
  g.out_ch = 64;
  Tensor<float> col;
  for (auto _ : state) {
    nn::im2col(x, g, col);
    benchmark::DoNotOptimize(col);
  }
}
BENCHMARK(BM_Im2col)->Unit(benchmark::kMillisecond);
