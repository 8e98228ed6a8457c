#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

namespace gardin::nn {

/// Dense row-major tensor. Dims are explicit and the layout is always
/// contiguous; layers document the dim order they expect ([B,C,H,W] for
/// image tensors, [B,D] for dense activations).
template <typename T>
struct Tensor {
  std::vector<int> dims;
  std::vector<T> v;

  Tensor() = default;
  explicit Tensor(std::vector<int> d) : dims(std::move(d)), v(count(dims), T(0)) {}

  static int64_t count(const std::vector<int>& d) {
    if (d.empty()) return 0;
    int64_t n = 1;
    for (int x : d) n *= x;
    return n;
  }

  int64_t size() const { return static_cast<int64_t>(v.size()); }
  int dim(int i) const { return dims[static_cast<size_t>(i)]; }
  T* data() { return v.data(); }
  const T* data() const { return v.data(); }
  void zero() { std::fill(v.begin(), v.end(), T(0)); }
  bool same_dims(const Tensor& o) const { return dims == o.dims; }
};

}  // namespace gardin::nn
