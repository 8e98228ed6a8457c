#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "gardin/error.hpp"
#include "gardin/parallel.hpp"
#include "gardin/rng.hpp"
#include "gardin/tensor.hpp"

namespace gardin::nn {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// ---------------------------------------------------------------------------
// GEMM wrappers. All three split output rows across the thread pool; each
// output element is accumulated by exactly one thread in a fixed order, so
// results do not depend on the thread count.
// ---------------------------------------------------------------------------

/// C[M,N] = A[M,K] * B[K,N]  (+= when accumulate)
template <typename T>
void gemm(int64_t M, int64_t K, int64_t N, const T* A, const T* B, T* C, bool accumulate) {
  parallel_for(M, [&](int64_t r0, int64_t r1) {
    Eigen::Map<const RowMat<T>> a(A + r0 * K, r1 - r0, K);
    Eigen::Map<const RowMat<T>> b(B, K, N);
    Eigen::Map<RowMat<T>> c(C + r0 * N, r1 - r0, N);
    if (accumulate)
      c.noalias() += a * b;
    else
      c.noalias() = a * b;
  });
}

/// C[K,N] = A[M,K]^T * B[M,N]  (+= when accumulate)
template <typename T>
void gemm_at_b(int64_t M, int64_t K, int64_t N, const T* A, const T* B, T* C, bool accumulate) {
  parallel_for(K, [&](int64_t r0, int64_t r1) {
    Eigen::Map<const RowMat<T>> a(A, M, K);
    Eigen::Map<const RowMat<T>> b(B, M, N);
    Eigen::Map<RowMat<T>> c(C + r0 * N, r1 - r0, N);
    if (accumulate)
      c.noalias() += a.middleCols(r0, r1 - r0).transpose() * b;
    else
      c.noalias() = a.middleCols(r0, r1 - r0).transpose() * b;
  });
}

/// C[M,K] = A[M,N] * B[K,N]^T  (+= when accumulate)
template <typename T>
void gemm_a_bt(int64_t M, int64_t K, int64_t N, const T* A, const T* B, T* C, bool accumulate) {
  parallel_for(M, [&](int64_t r0, int64_t r1) {
    Eigen::Map<const RowMat<T>> a(A + r0 * N, r1 - r0, N);
    Eigen::Map<const RowMat<T>> b(B, K, N);
    Eigen::Map<RowMat<T>> c(C + r0 * K, r1 - r0, K);
    if (accumulate)
      c.noalias() += a * b.transpose();
    else
      c.noalias() = a * b.transpose();
  });
}

// ---------------------------------------------------------------------------
// Convolution geometry and the im2col/col2im pair shared by Conv2d and
// ConvTranspose2d (the transposed convolution is implemented as the exact
// adjoint of a mirror convolution with the same geometry).
// ---------------------------------------------------------------------------

struct ConvGeom {
  int in_ch = 0, out_ch = 0;
  int kernel = 4, stride = 2;
  int pad_t = 1, pad_l = 1, pad_b = 1, pad_r = 1;

  int out_h(int in_h) const { return (in_h + pad_t + pad_b - kernel) / stride + 1; }
  int out_w(int in_w) const { return (in_w + pad_l + pad_r - kernel) / stride + 1; }
  int patch() const { return in_ch * kernel * kernel; }
};

/// col[K, B*OH*OW] from x[B,C,H,W]; K = C*k*k. Out-of-bounds taps are zero.
template <typename T>
void im2col(const Tensor<T>& x, const ConvGeom& g, Tensor<T>& col) {
  const int B = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
  const int OH = g.out_h(H), OW = g.out_w(W);
  const int64_t N = static_cast<int64_t>(B) * OH * OW;
  const int K = C * g.kernel * g.kernel;
  col.dims = {K, static_cast<int>(N)};
  col.v.resize(static_cast<size_t>(K) * N);
  parallel_for(K, [&](int64_t k0, int64_t k1) {
    for (int64_t k = k0; k < k1; ++k) {
      const int c = static_cast<int>(k) / (g.kernel * g.kernel);
      const int ky = (static_cast<int>(k) / g.kernel) % g.kernel;
      const int kx = static_cast<int>(k) % g.kernel;
      T* dst = col.data() + k * N;
      for (int b = 0; b < B; ++b) {
        const T* src = x.data() + (static_cast<int64_t>(b) * C + c) * H * W;
        for (int oy = 0; oy < OH; ++oy) {
          const int iy = oy * g.stride - g.pad_t + ky;
          for (int ox = 0; ox < OW; ++ox, ++dst) {
            const int ix = ox * g.stride - g.pad_l + kx;
            *dst = (iy >= 0 && iy < H && ix >= 0 && ix < W) ? src[iy * W + ix] : T(0);
          }
        }
      }
    }
  });
}

/// Adjoint of im2col: scatter-adds col back into x[B,C,H,W] (x must be
/// pre-sized and zeroed by the caller). Parallel over channels, which
/// write disjoint planes.
template <typename T>
void col2im_add(const Tensor<T>& col, const ConvGeom& g, Tensor<T>& x) {
  const int B = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
  const int OH = g.out_h(H), OW = g.out_w(W);
  const int64_t N = static_cast<int64_t>(B) * OH * OW;
  parallel_for(C, [&](int64_t c0, int64_t c1) {
    for (int64_t c = c0; c < c1; ++c) {
      for (int ky = 0; ky < g.kernel; ++ky) {
        for (int kx = 0; kx < g.kernel; ++kx) {
          const int64_t k = (c * g.kernel + ky) * g.kernel + kx;
          const T* src = col.data() + k * N;
          for (int b = 0; b < B; ++b) {
            T* dst = x.data() + (static_cast<int64_t>(b) * C + c) * H * W;
            for (int oy = 0; oy < OH; ++oy) {
              const int iy = oy * g.stride - g.pad_t + ky;
              if (iy < 0 || iy >= H) {
                src += OW;
                continue;
              }
              for (int ox = 0; ox < OW; ++ox, ++src) {
                const int ix = ox * g.stride - g.pad_l + kx;
                if (ix >= 0 && ix < W) dst[iy * W + ix] += *src;
              }
            }
          }
        }
      }
    }
  });
}

// ---------------------------------------------------------------------------
// Parameter bookkeeping
// ---------------------------------------------------------------------------

template <typename T>
struct ParamRef {
  std::string name;
  Tensor<T>* value = nullptr;
  Tensor<T>* grad = nullptr;
};

template <typename T>
void init_normal(Tensor<T>& t, Rng& rng, double stddev) {
  for (auto& x : t.v) x = static_cast<T>(rng.normal() * stddev);
}

// ---------------------------------------------------------------------------
// Layers. forward() is const and writes everything backward() needs into an
// externally owned cache, so one set of weights can appear several times in
// a computation graph. backward() accumulates parameter gradients.
// ---------------------------------------------------------------------------

template <typename T>
struct Conv2d {
  ConvGeom geom;
  Tensor<T> w;   // [out_ch, in_ch*k*k]
  Tensor<T> b;   // [out_ch]
  Tensor<T> gw, gb;

  struct Cache {
    Tensor<T> x;
  };

  void configure(const ConvGeom& g) {
    geom = g;
    w = Tensor<T>({g.out_ch, g.patch()});
    b = Tensor<T>({g.out_ch});
    gw = Tensor<T>({g.out_ch, g.patch()});
    gb = Tensor<T>({g.out_ch});
  }

  Tensor<T> forward(Tensor<T> x, Cache& c) const {
    const int B = x.dim(0), H = x.dim(2), W = x.dim(3);
    if (x.dim(1) != geom.in_ch) throw ValidationError("Conv2d: channel mismatch");
    const int OH = geom.out_h(H), OW = geom.out_w(W);
    const int64_t N = static_cast<int64_t>(B) * OH * OW;
    Tensor<T> col;
    im2col(x, geom, col);
    Tensor<T> y_mat({geom.out_ch, static_cast<int>(N)});
    gemm<T>(geom.out_ch, geom.patch(), N, w.data(), col.data(), y_mat.data(), false);
    Tensor<T> y({B, geom.out_ch, OH, OW});
    const int64_t plane = static_cast<int64_t>(OH) * OW;
    parallel_for(static_cast<int64_t>(B) * geom.out_ch, [&](int64_t i0, int64_t i1) {
      for (int64_t i = i0; i < i1; ++i) {
        const int64_t bb = i / geom.out_ch, m = i % geom.out_ch;
        const T* src = y_mat.data() + m * N + bb * plane;
        T* dst = y.data() + i * plane;
        const T bias = b.v[static_cast<size_t>(m)];
        for (int64_t p = 0; p < plane; ++p) dst[p] = src[p] + bias;
      }
    });
    c.x = std::move(x);
    return y;
  }

  Tensor<T> backward(const Tensor<T>& gy, const Cache& c, bool need_gx) {
    const int B = c.x.dim(0), H = c.x.dim(2), W = c.x.dim(3);
    const int OH = gy.dim(2), OW = gy.dim(3);
    const int64_t N = static_cast<int64_t>(B) * OH * OW;
    const int64_t plane = static_cast<int64_t>(OH) * OW;

    Tensor<T> gy_mat({geom.out_ch, static_cast<int>(N)});
    parallel_for(geom.out_ch, [&](int64_t m0, int64_t m1) {
      for (int64_t m = m0; m < m1; ++m) {
        T* dst = gy_mat.data() + m * N;
        double sum = 0.0;
        for (int bb = 0; bb < B; ++bb) {
          const T* src = gy.data() + (static_cast<int64_t>(bb) * geom.out_ch + m) * plane;
          for (int64_t p = 0; p < plane; ++p) {
            dst[bb * plane + p] = src[p];
            sum += static_cast<double>(src[p]);
          }
        }
        gb.v[static_cast<size_t>(m)] += static_cast<T>(sum);
      }
    });

    Tensor<T> col;
    im2col(c.x, geom, col);
    gemm_a_bt<T>(geom.out_ch, geom.patch(), N, gy_mat.data(), col.data(), gw.data(), true);

    Tensor<T> gx;
    if (need_gx) {
      Tensor<T> colg({geom.patch(), static_cast<int>(N)});
      gemm_at_b<T>(geom.out_ch, geom.patch(), N, w.data(), gy_mat.data(), colg.data(), false);
      gx = Tensor<T>({B, geom.in_ch, H, W});
      col2im_add(colg, geom, gx);
    }
    return gx;
  }

  void collect(const std::string& prefix, std::vector<ParamRef<T>>& out) {
    out.push_back({prefix + ".w", &w, &gw});
    out.push_back({prefix + ".b", &b, &gb});
  }
};

/// Fractionally-strided convolution, realized as the adjoint of a mirror
/// Conv2d whose geometry maps the *output* of this layer to its *input*.
/// For kernel 4 / stride 2 / pad 1 this doubles the spatial size.
template <typename T>
struct ConvTranspose2d {
  ConvGeom mirror;   // in_ch = this layer's out_ch, out_ch = this layer's in_ch
  Tensor<T> w;       // [in_ch, out_ch*k*k]
  Tensor<T> b;       // [out_ch]
  Tensor<T> gw, gb;

  struct Cache {
    Tensor<T> x_mat;  // [in_ch, B*H*W]
    int B = 0, H = 0, W = 0;
  };

  void configure(int in_ch, int out_ch) {
    mirror = ConvGeom{};
    mirror.in_ch = out_ch;
    mirror.out_ch = in_ch;
    w = Tensor<T>({in_ch, mirror.patch()});
    b = Tensor<T>({out_ch});
    gw = Tensor<T>({in_ch, mirror.patch()});
    gb = Tensor<T>({out_ch});
  }

  int in_ch() const { return mirror.out_ch; }
  int out_ch() const { return mirror.in_ch; }

  Tensor<T> forward(Tensor<T> x, Cache& c) const {
    const int B = x.dim(0), H = x.dim(2), W = x.dim(3);
    if (x.dim(1) != in_ch()) throw ValidationError("ConvTranspose2d: channel mismatch");
    // smallest sizes the mirror convolution maps back onto (H, W)
    const int OH = (H - 1) * mirror.stride + mirror.kernel - mirror.pad_t - mirror.pad_b;
    const int OW = (W - 1) * mirror.stride + mirror.kernel - mirror.pad_l - mirror.pad_r;
    const int64_t Np = static_cast<int64_t>(B) * H * W;
    const int64_t plane = static_cast<int64_t>(H) * W;

    Tensor<T> x_mat({in_ch(), static_cast<int>(Np)});
    parallel_for(in_ch(), [&](int64_t c0, int64_t c1) {
      for (int64_t ch = c0; ch < c1; ++ch) {
        T* dst = x_mat.data() + ch * Np;
        for (int bb = 0; bb < B; ++bb) {
          const T* src = x.data() + (static_cast<int64_t>(bb) * in_ch() + ch) * plane;
          for (int64_t p = 0; p < plane; ++p) dst[bb * plane + p] = src[p];
        }
      }
    });

    Tensor<T> colg({mirror.patch(), static_cast<int>(Np)});
    gemm_at_b<T>(in_ch(), mirror.patch(), Np, w.data(), x_mat.data(), colg.data(), false);

    Tensor<T> y({B, out_ch(), OH, OW});
    col2im_add(colg, mirror, y);
    const int64_t oplane = static_cast<int64_t>(OH) * OW;
    parallel_for(static_cast<int64_t>(B) * out_ch(), [&](int64_t i0, int64_t i1) {
      for (int64_t i = i0; i < i1; ++i) {
        const T bias = b.v[static_cast<size_t>(i % out_ch())];
        T* dst = y.data() + i * oplane;
        for (int64_t p = 0; p < oplane; ++p) dst[p] += bias;
      }
    });
    c.x_mat = std::move(x_mat);
    c.B = B;
    c.H = H;
    c.W = W;
    return y;
  }

  Tensor<T> backward(const Tensor<T>& gy, const Cache& c, bool need_gx) {
    const int B = c.B, H = c.H, W = c.W;
    const int64_t Np = static_cast<int64_t>(B) * H * W;
    const int64_t oplane = static_cast<int64_t>(gy.dim(2)) * gy.dim(3);

    parallel_for(out_ch(), [&](int64_t m0, int64_t m1) {
      for (int64_t m = m0; m < m1; ++m) {
        double sum = 0.0;
        for (int bb = 0; bb < B; ++bb) {
          const T* src = gy.data() + (static_cast<int64_t>(bb) * out_ch() + m) * oplane;
          for (int64_t p = 0; p < oplane; ++p) sum += static_cast<double>(src[p]);
        }
        gb.v[static_cast<size_t>(m)] += static_cast<T>(sum);
      }
    });

    Tensor<T> col_gy;
    im2col(gy, mirror, col_gy);
    gemm_a_bt<T>(in_ch(), mirror.patch(), Np, c.x_mat.data(), col_gy.data(), gw.data(), true);

    Tensor<T> gx;
    if (need_gx) {
      Tensor<T> gx_mat({in_ch(), static_cast<int>(Np)});
      gemm<T>(in_ch(), mirror.patch(), Np, w.data(), col_gy.data(), gx_mat.data(), false);
      gx = Tensor<T>({B, in_ch(), H, W});
      const int64_t plane = static_cast<int64_t>(H) * W;
      parallel_for(in_ch(), [&](int64_t c0, int64_t c1) {
        for (int64_t ch = c0; ch < c1; ++ch) {
          const T* src = gx_mat.data() + ch * Np;
          for (int bb = 0; bb < B; ++bb) {
            T* dst = gx.data() + (static_cast<int64_t>(bb) * in_ch() + ch) * plane;
            for (int64_t p = 0; p < plane; ++p) dst[p] = src[bb * plane + p];
          }
        }
      });
    }
    return gx;
  }

  void collect(const std::string& prefix, std::vector<ParamRef<T>>& out) {
    out.push_back({prefix + ".w", &w, &gw});
    out.push_back({prefix + ".b", &b, &gb});
  }
};

/// Per-sample, per-channel normalization over the spatial dims (no affine
/// parameters).
template <typename T>
struct InstanceNorm {
  double eps = 1e-5;

  struct Cache {
    Tensor<T> y;
    std::vector<T> invstd;  // [B*C]
  };

  Tensor<T> forward(Tensor<T> x, Cache& c) const {
    const int B = x.dim(0), C = x.dim(1);
    const int64_t plane = static_cast<int64_t>(x.dim(2)) * x.dim(3);
    Tensor<T> y(x.dims);
    c.invstd.assign(static_cast<size_t>(B) * C, T(0));
    parallel_for(static_cast<int64_t>(B) * C, [&](int64_t i0, int64_t i1) {
      for (int64_t i = i0; i < i1; ++i) {
        const T* src = x.data() + i * plane;
        double mean = 0.0;
        for (int64_t p = 0; p < plane; ++p) mean += src[p];
        mean /= static_cast<double>(plane);
        double var = 0.0;
        for (int64_t p = 0; p < plane; ++p) {
          const double d = src[p] - mean;
          var += d * d;
        }
        var /= static_cast<double>(plane);
        const double inv = 1.0 / std::sqrt(var + eps);
        c.invstd[static_cast<size_t>(i)] = static_cast<T>(inv);
        T* dst = y.data() + i * plane;
        for (int64_t p = 0; p < plane; ++p)
          dst[p] = static_cast<T>((src[p] - mean) * inv);
      }
    });
    c.y = y;
    return y;
  }

  Tensor<T> backward(const Tensor<T>& gy, const Cache& c) const {
    const int64_t channels = static_cast<int64_t>(c.invstd.size());
    const int64_t plane = c.y.size() / channels;
    Tensor<T> gx(c.y.dims);
    parallel_for(channels, [&](int64_t i0, int64_t i1) {
      for (int64_t i = i0; i < i1; ++i) {
        const T* yv = c.y.data() + i * plane;
        const T* g = gy.data() + i * plane;
        double mean_g = 0.0, mean_gy = 0.0;
        for (int64_t p = 0; p < plane; ++p) {
          mean_g += g[p];
          mean_gy += static_cast<double>(g[p]) * yv[p];
        }
        mean_g /= static_cast<double>(plane);
        mean_gy /= static_cast<double>(plane);
        const double inv = c.invstd[static_cast<size_t>(i)];
        T* dst = gx.data() + i * plane;
        for (int64_t p = 0; p < plane; ++p)
          dst[p] = static_cast<T>(inv * (g[p] - mean_g - yv[p] * mean_gy));
      }
    });
    return gx;
  }
};

template <typename T>
struct LeakyReLU {
  double slope = 0.2;

  struct Cache {
    Tensor<T> y;
  };

  Tensor<T> forward(Tensor<T> x, Cache& c) const {
    const T a = static_cast<T>(slope);
    parallel_for(x.size(), [&](int64_t i0, int64_t i1) {
      for (int64_t i = i0; i < i1; ++i) x.v[i] = x.v[i] > T(0) ? x.v[i] : a * x.v[i];
    });
    c.y = x;
    return x;
  }

  Tensor<T> backward(const Tensor<T>& gy, const Cache& c) const {
    Tensor<T> gx(c.y.dims);
    const T a = static_cast<T>(slope);
    parallel_for(gy.size(), [&](int64_t i0, int64_t i1) {
      for (int64_t i = i0; i < i1; ++i) gx.v[i] = c.y.v[i] > T(0) ? gy.v[i] : a * gy.v[i];
    });
    return gx;
  }
};

template <typename T>
struct Sigmoid {
  struct Cache {
    Tensor<T> y;
  };

  Tensor<T> forward(Tensor<T> x, Cache& c) const {
    parallel_for(x.size(), [&](int64_t i0, int64_t i1) {
      for (int64_t i = i0; i < i1; ++i)
        x.v[i] = static_cast<T>(1.0 / (1.0 + std::exp(-static_cast<double>(x.v[i]))));
    });
    c.y = x;
    return x;
  }

  Tensor<T> backward(const Tensor<T>& gy, const Cache& c) const {
    Tensor<T> gx(c.y.dims);
    parallel_for(gy.size(), [&](int64_t i0, int64_t i1) {
      for (int64_t i = i0; i < i1; ++i) gx.v[i] = gy.v[i] * c.y.v[i] * (T(1) - c.y.v[i]);
    });
    return gx;
  }
};

template <typename T>
struct Dense {
  Tensor<T> w;  // [out, in]
  Tensor<T> b;  // [out]
  Tensor<T> gw, gb;
  int in = 0, out = 0;

  struct Cache {
    Tensor<T> x;
  };

  void configure(int in_dim, int out_dim) {
    in = in_dim;
    out = out_dim;
    w = Tensor<T>({out, in});
    b = Tensor<T>({out});
    gw = Tensor<T>({out, in});
    gb = Tensor<T>({out});
  }

  Tensor<T> forward(Tensor<T> x, Cache& c) const {
    const int B = x.dim(0);
    if (x.dim(1) != in) throw ValidationError("Dense: width mismatch");
    Tensor<T> y({B, out});
    gemm_a_bt<T>(B, out, in, x.data(), w.data(), y.data(), false);
    for (int bb = 0; bb < B; ++bb)
      for (int m = 0; m < out; ++m) y.v[static_cast<size_t>(bb) * out + m] += b.v[m];
    c.x = std::move(x);
    return y;
  }

  Tensor<T> backward(const Tensor<T>& gy, const Cache& c, bool need_gx) {
    const int B = gy.dim(0);
    gemm_at_b<T>(B, out, in, gy.data(), c.x.data(), gw.data(), true);
    for (int bb = 0; bb < B; ++bb)
      for (int m = 0; m < out; ++m) gb.v[m] += gy.v[static_cast<size_t>(bb) * out + m];
    Tensor<T> gx;
    if (need_gx) {
      gx = Tensor<T>({B, in});
      gemm<T>(B, out, in, gy.data(), w.data(), gx.data(), false);
    }
    return gx;
  }

  void collect(const std::string& prefix, std::vector<ParamRef<T>>& out_refs) {
    out_refs.push_back({prefix + ".w", &w, &gw});
    out_refs.push_back({prefix + ".b", &b, &gb});
  }
};

/// Inverted dropout; identity in eval mode.
template <typename T>
struct Dropout {
  double p = 0.3;

  struct Cache {
    std::vector<uint8_t> keep;
    bool train = false;
  };

  Tensor<T> forward(Tensor<T> x, Cache& c, bool train, Rng* rng) const {
    c.train = train;
    if (!train || p <= 0.0) return x;
    const T scale = static_cast<T>(1.0 / (1.0 - p));
    c.keep.resize(static_cast<size_t>(x.size()));
    for (int64_t i = 0; i < x.size(); ++i) {
      const bool keep = rng->uniform() >= p;
      c.keep[static_cast<size_t>(i)] = keep;
      x.v[i] = keep ? x.v[i] * scale : T(0);
    }
    return x;
  }

  Tensor<T> backward(const Tensor<T>& gy, const Cache& c) const {
    if (!c.train || p <= 0.0) return gy;
    Tensor<T> gx(gy.dims);
    const T scale = static_cast<T>(1.0 / (1.0 - p));
    for (int64_t i = 0; i < gy.size(); ++i)
      gx.v[i] = c.keep[static_cast<size_t>(i)] ? gy.v[i] * scale : T(0);
    return gx;
  }
};

// ---------------------------------------------------------------------------
// Channel concat/split for U-net skip connections ([dec, skip] order).
// ---------------------------------------------------------------------------

template <typename T>
Tensor<T> concat_channels(const Tensor<T>& a, const Tensor<T>& b) {
  const int B = a.dim(0), Ca = a.dim(1), Cb = b.dim(1), H = a.dim(2), W = a.dim(3);
  Tensor<T> y({B, Ca + Cb, H, W});
  const int64_t plane = static_cast<int64_t>(H) * W;
  parallel_for(B, [&](int64_t b0, int64_t b1) {
    for (int64_t bb = b0; bb < b1; ++bb) {
      std::copy_n(a.data() + bb * Ca * plane, Ca * plane, y.data() + bb * (Ca + Cb) * plane);
      std::copy_n(b.data() + bb * Cb * plane, Cb * plane,
                  y.data() + (bb * (Ca + Cb) + Ca) * plane);
    }
  });
  return y;
}

template <typename T>
void split_channels(const Tensor<T>& g, int Ca, Tensor<T>& ga, Tensor<T>& gb) {
  const int B = g.dim(0), C = g.dim(1), H = g.dim(2), W = g.dim(3);
  const int Cb = C - Ca;
  ga = Tensor<T>({B, Ca, H, W});
  gb = Tensor<T>({B, Cb, H, W});
  const int64_t plane = static_cast<int64_t>(H) * W;
  parallel_for(B, [&](int64_t b0, int64_t b1) {
    for (int64_t bb = b0; bb < b1; ++bb) {
      std::copy_n(g.data() + bb * C * plane, Ca * plane, ga.data() + bb * Ca * plane);
      std::copy_n(g.data() + (bb * C + Ca) * plane, Cb * plane, gb.data() + bb * Cb * plane);
    }
  });
}

// ---------------------------------------------------------------------------
// Adam with bias correction.
// ---------------------------------------------------------------------------

template <typename T>
class Adam {
 public:
  Adam(double beta1, double beta2, double eps = 1e-8)
      : beta1_(beta1), beta2_(beta2), eps_(eps) {}

  void step(const std::vector<ParamRef<T>>& params, double lr) {
    if (m_.empty()) {
      for (const auto& p : params) {
        m_.emplace_back(p.value->v.size(), T(0));
        v_.emplace_back(p.value->v.size(), T(0));
      }
    }
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (size_t pi = 0; pi < params.size(); ++pi) {
      T* w = params[pi].value->data();
      const T* g = params[pi].grad->data();
      T* m = m_[pi].data();
      T* v = v_[pi].data();
      const int64_t n = params[pi].value->size();
      parallel_for(n, [&](int64_t i0, int64_t i1) {
        for (int64_t i = i0; i < i1; ++i) {
          const double gi = g[i];
          const double mi = beta1_ * m[i] + (1.0 - beta1_) * gi;
          const double vi = beta2_ * v[i] + (1.0 - beta2_) * gi * gi;
          m[i] = static_cast<T>(mi);
          v[i] = static_cast<T>(vi);
          w[i] -= static_cast<T>(lr * (mi / bc1) / (std::sqrt(vi / bc2) + eps_));
        }
      });
    }
  }

  int64_t steps() const { return t_; }

 private:
  double beta1_, beta2_, eps_;
  int64_t t_ = 0;
  std::vector<std::vector<T>> m_, v_;
};

template <typename T>
void zero_grads(const std::vector<ParamRef<T>>& params) {
  for (const auto& p : params) p.grad->zero();
}

/// dst += src, element-wise.
template <typename T>
void add_into(Tensor<T>& dst, const Tensor<T>& src) {
  parallel_for(dst.size(), [&](int64_t i0, int64_t i1) {
    for (int64_t i = i0; i < i1; ++i) dst.v[i] += src.v[i];
  });
}

}  // namespace gardin::nn
