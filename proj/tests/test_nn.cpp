#include <doctest.h>

#include <cmath>
#include <functional>

#include "gardin/nn.hpp"
#include "gardin/rng.hpp"

using namespace gardin;
using nn::Tensor;

namespace {

void randomize(Tensor<double>& t, Rng& rng, double scale = 1.0) {
  for (auto& v : t.v) v = rng.normal() * scale;
}

// scalar probe loss sum(c .* y) so d(loss)/dy = c
struct Probe {
  Tensor<double> c;
  explicit Probe(const Tensor<double>& like, Rng& rng) : c(like.dims) { randomize(c, rng); }
  double loss(const Tensor<double>& y) const {
    double s = 0.0;
    for (int64_t i = 0; i < y.size(); ++i) s += c.v[i] * y.v[i];
    return s;
  }
};

// max relative error between analytic and central-difference gradients
double fd_check(Tensor<double>& param, const std::function<double()>& eval,
                const Tensor<double>& analytic, double h = 1e-6) {
  double max_abs = 1e-12, max_err = 0.0;
  for (int64_t i = 0; i < param.size(); ++i) {
    const double keep = param.v[i];
    param.v[i] = keep + h;
    const double up = eval();
    param.v[i] = keep - h;
    const double dn = eval();
    param.v[i] = keep;
    const double fd = (up - dn) / (2.0 * h);
    max_abs = std::max(max_abs, std::abs(fd));
    max_err = std::max(max_err, std::abs(fd - analytic.v[i]));
  }
  return max_err / max_abs;
}

}  // namespace

TEST_CASE("gemm wrappers match naive loops") {
  Rng rng(1);
  const int M = 5, K = 7, N = 9;
  Tensor<double> A({M, K}), B({K, N}), Bt({N, K}), C({M, N});
  randomize(A, rng);
  randomize(B, rng);
  randomize(Bt, rng);

  nn::gemm<double>(M, K, N, A.data(), B.data(), C.data(), false);
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < N; ++j) {
      double s = 0;
      for (int k = 0; k < K; ++k) s += A.v[i * K + k] * B.v[k * N + j];
      CHECK(C.v[i * N + j] == doctest::Approx(s).epsilon(1e-12));
    }

  Tensor<double> C2({K, N});
  nn::gemm_at_b<double>(M, K, N, A.data(), C.data(), C2.data(), false);
  for (int k = 0; k < K; ++k)
    for (int j = 0; j < N; ++j) {
      double s = 0;
      for (int i = 0; i < M; ++i) s += A.v[i * K + k] * C.v[i * N + j];
      CHECK(C2.v[k * N + j] == doctest::Approx(s).epsilon(1e-12));
    }

  Tensor<double> C3({M, K});
  nn::gemm_a_bt<double>(M, K, N, C.data(), C2.data(), C3.data(), false);
  const Tensor<double> keep = C3;
  nn::gemm_a_bt<double>(M, K, N, C.data(), C2.data(), C3.data(), true);  // accumulate doubles it
  for (int64_t i = 0; i < C3.size(); ++i)
    CHECK(C3.v[i] == doctest::Approx(2.0 * keep.v[i]).epsilon(1e-12));
}

TEST_CASE("conv2d gradients match finite differences") {
  Rng rng(2);
  nn::Conv2d<double> conv;
  nn::ConvGeom g;
  g.in_ch = 3;
  g.out_ch = 4;
  conv.configure(g);
  randomize(conv.w, rng, 0.3);
  randomize(conv.b, rng, 0.1);
  Tensor<double> x({2, 3, 8, 8});
  randomize(x, rng);

  nn::Conv2d<double>::Cache cache;
  Tensor<double> y = conv.forward(x, cache);
  CHECK(y.dims == std::vector<int>{2, 4, 4, 4});
  Probe probe(y, rng);
  conv.gw.zero();
  conv.gb.zero();
  const Tensor<double> gx = conv.backward(probe.c, cache, true);

  auto eval = [&] {
    nn::Conv2d<double>::Cache c;
    return probe.loss(conv.forward(x, c));
  };
  CHECK(fd_check(x, eval, gx) < 1e-7);
  CHECK(fd_check(conv.w, eval, conv.gw) < 1e-7);
  CHECK(fd_check(conv.b, eval, conv.gb) < 1e-7);
}

TEST_CASE("asymmetric-padding 1-stride conv keeps 4x4 and backprops") {
  Rng rng(3);
  nn::Conv2d<double> conv;
  nn::ConvGeom g;
  g.in_ch = 3;
  g.out_ch = 1;
  g.stride = 1;
  g.pad_t = g.pad_l = 1;
  g.pad_b = g.pad_r = 2;
  conv.configure(g);
  randomize(conv.w, rng, 0.3);
  Tensor<double> x({2, 3, 4, 4});
  randomize(x, rng);
  nn::Conv2d<double>::Cache cache;
  Tensor<double> y = conv.forward(x, cache);
  CHECK(y.dims == std::vector<int>{2, 1, 4, 4});
  Probe probe(y, rng);
  conv.gw.zero();
  conv.gb.zero();
  const Tensor<double> gx = conv.backward(probe.c, cache, true);
  auto eval = [&] {
    nn::Conv2d<double>::Cache c;
    return probe.loss(conv.forward(x, c));
  };
  CHECK(fd_check(x, eval, gx) < 1e-7);
  CHECK(fd_check(conv.w, eval, conv.gw) < 1e-7);
}

TEST_CASE("transposed conv doubles the resolution and backprops") {
  Rng rng(4);
  nn::ConvTranspose2d<double> tconv;
  tconv.configure(4, 3);
  randomize(tconv.w, rng, 0.3);
  randomize(tconv.b, rng, 0.1);
  Tensor<double> x({2, 4, 4, 4});
  randomize(x, rng);
  nn::ConvTranspose2d<double>::Cache cache;
  Tensor<double> y = tconv.forward(x, cache);
  CHECK(y.dims == std::vector<int>{2, 3, 8, 8});
  Probe probe(y, rng);
  tconv.gw.zero();
  tconv.gb.zero();
  const Tensor<double> gx = tconv.backward(probe.c, cache, true);
  auto eval = [&] {
    nn::ConvTranspose2d<double>::Cache c;
    return probe.loss(tconv.forward(x, c));
  };
  CHECK(fd_check(x, eval, gx) < 1e-7);
  CHECK(fd_check(tconv.w, eval, tconv.gw) < 1e-7);
  CHECK(fd_check(tconv.b, eval, tconv.gb) < 1e-7);
}

TEST_CASE("conv and transposed conv are adjoint") {
  // <conv(x), y> == <x, tconv(y)> when they share the same kernel tensor
  Rng rng(5);
  nn::Conv2d<double> conv;
  nn::ConvGeom g;
  g.in_ch = 2;
  g.out_ch = 3;
  conv.configure(g);
  randomize(conv.w, rng);
  nn::ConvTranspose2d<double> tconv;
  tconv.configure(3, 2);
  tconv.w = conv.w;  // same [3, 2*16] layout seen from both sides

  Tensor<double> x({1, 2, 8, 8}), y({1, 3, 4, 4});
  randomize(x, rng);
  randomize(y, rng);
  nn::Conv2d<double>::Cache c1;
  nn::ConvTranspose2d<double>::Cache c2;
  const Tensor<double> cx = conv.forward(x, c1);
  const Tensor<double> ty = tconv.forward(y, c2);
  double lhs = 0.0, rhs = 0.0;
  for (int64_t i = 0; i < cx.size(); ++i) lhs += cx.v[i] * y.v[i];
  for (int64_t i = 0; i < ty.size(); ++i) rhs += ty.v[i] * x.v[i];
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
}

TEST_CASE("instance norm normalizes and backprops") {
  Rng rng(6);
  nn::InstanceNorm<double> in;
  Tensor<double> x({2, 3, 6, 6});
  randomize(x, rng, 2.0);
  nn::InstanceNorm<double>::Cache cache;
  const Tensor<double> y = in.forward(x, cache);
  for (int i = 0; i < 6; ++i) {
    double mean = 0.0, var = 0.0;
    for (int p = 0; p < 36; ++p) mean += y.v[i * 36 + p];
    mean /= 36.0;
    for (int p = 0; p < 36; ++p) var += (y.v[i * 36 + p] - mean) * (y.v[i * 36 + p] - mean);
    CHECK(mean == doctest::Approx(0.0).epsilon(1e-10));
    CHECK(var / 36.0 == doctest::Approx(1.0).epsilon(1e-3));
  }
  Probe probe(y, rng);
  const Tensor<double> gx = in.backward(probe.c, cache);
  auto eval = [&] {
    nn::InstanceNorm<double>::Cache c;
    return probe.loss(in.forward(x, c));
  };
  CHECK(fd_check(x, eval, gx, 1e-5) < 1e-6);
}

TEST_CASE("activations backprop") {
  Rng rng(7);
  nn::LeakyReLU<double> lrelu;
  nn::Sigmoid<double> sig;
  Tensor<double> x({3, 5});
  randomize(x, rng);
  {
    nn::LeakyReLU<double>::Cache c;
    const Tensor<double> y = lrelu.forward(x, c);
    Probe probe(y, rng);
    const Tensor<double> gx = lrelu.backward(probe.c, c);
    auto eval = [&] {
      nn::LeakyReLU<double>::Cache cc;
      return probe.loss(lrelu.forward(x, cc));
    };
    CHECK(fd_check(x, eval, gx) < 1e-7);
  }
  {
    nn::Sigmoid<double>::Cache c;
    const Tensor<double> y = sig.forward(x, c);
    for (double v : y.v) {
      CHECK(v > 0.0);
      CHECK(v < 1.0);
    }
    Probe probe(y, rng);
    const Tensor<double> gx = sig.backward(probe.c, c);
    auto eval = [&] {
      nn::Sigmoid<double>::Cache cc;
      return probe.loss(sig.forward(x, cc));
    };
    CHECK(fd_check(x, eval, gx) < 1e-7);
  }
}

TEST_CASE("dense backprops") {
  Rng rng(8);
  nn::Dense<double> dense;
  dense.configure(5, 4);
  randomize(dense.w, rng, 0.5);
  randomize(dense.b, rng, 0.1);
  Tensor<double> x({3, 5});
  randomize(x, rng);
  nn::Dense<double>::Cache cache;
  const Tensor<double> y = dense.forward(x, cache);
  CHECK(y.dims == std::vector<int>{3, 4});
  Probe probe(y, rng);
  dense.gw.zero();
  dense.gb.zero();
  const Tensor<double> gx = dense.backward(probe.c, cache, true);
  auto eval = [&] {
    nn::Dense<double>::Cache c;
    return probe.loss(dense.forward(x, c));
  };
  CHECK(fd_check(x, eval, gx) < 1e-7);
  CHECK(fd_check(dense.w, eval, dense.gw) < 1e-7);
  CHECK(fd_check(dense.b, eval, dense.gb) < 1e-7);
}

TEST_CASE("dropout: identity in eval, mask-consistent in train") {
  Rng rng(9);
  nn::Dropout<double> drop;
  drop.p = 0.5;
  Tensor<double> x({4, 8});
  randomize(x, rng);
  nn::Dropout<double>::Cache c;
  const Tensor<double> y_eval = drop.forward(x, c, false, nullptr);
  for (int64_t i = 0; i < x.size(); ++i) CHECK(y_eval.v[i] == x.v[i]);

  Rng drop_rng(10);
  const Tensor<double> y = drop.forward(x, c, true, &drop_rng);
  int kept = 0;
  for (int64_t i = 0; i < x.size(); ++i) {
    if (y.v[i] != 0.0) {
      CHECK(y.v[i] == doctest::Approx(2.0 * x.v[i]));
      ++kept;
    }
  }
  CHECK(kept > 0);
  CHECK(kept < x.size());
  Tensor<double> gy(x.dims);
  randomize(gy, rng);
  const Tensor<double> gx = drop.backward(gy, c);
  for (int64_t i = 0; i < x.size(); ++i) {
    if (y.v[i] == 0.0)
      CHECK(gx.v[i] == 0.0);
    else
      CHECK(gx.v[i] == doctest::Approx(2.0 * gy.v[i]));
  }
}

TEST_CASE("channel concat/split roundtrip") {
  Rng rng(11);
  Tensor<double> a({2, 3, 4, 4}), b({2, 2, 4, 4});
  randomize(a, rng);
  randomize(b, rng);
  const Tensor<double> y = nn::concat_channels(a, b);
  CHECK(y.dims == std::vector<int>{2, 5, 4, 4});
  Tensor<double> ga, gb;
  nn::split_channels(y, 3, ga, gb);
  for (int64_t i = 0; i < a.size(); ++i) CHECK(ga.v[i] == a.v[i]);
  for (int64_t i = 0; i < b.size(); ++i) CHECK(gb.v[i] == b.v[i]);
}

TEST_CASE("adam single-step hand check") {
  Tensor<double> w({2});
  w.v = {1.0, 2.0};
  Tensor<double> g({2});
  g.v = {0.1, -0.2};
  std::vector<nn::ParamRef<double>> params{{"w", &w, &g}};
  nn::Adam<double> adam(0.5, 0.999);
  adam.step(params, 0.1);
  CHECK(w.v[0] == doctest::Approx(0.9).epsilon(1e-6));
  CHECK(w.v[1] == doctest::Approx(2.1).epsilon(1e-6));
  CHECK(adam.steps() == 1);
}
