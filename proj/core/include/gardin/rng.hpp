#pragma once

#include <cstdint>
#include <string_view>

namespace gardin {

/// Deterministic xoshiro256++ generator. Used everywhere instead of <random>
/// engines/distributions so that streams are reproducible across platforms
/// and standard-library versions.
class Rng {
 public:
  explicit Rng(uint64_t seed);

  uint64_t next_u64();

  /// Uniform double in [0, 1).
  double uniform();

  /// Uniform double in [lo, hi).
  double uniform(double lo, double hi);

  /// Standard normal via Box-Muller (second value cached).
  double normal();

  /// Uniform integer in [0, n), n >= 1. Unbiased (rejection sampling).
  uint32_t below(uint32_t n);

 private:
  uint64_t s_[4];
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Derives an independent, named substream from one top-level seed, so all
/// randomness in a run flows from a single integer. `index` distinguishes
/// per-epoch or per-item streams within one name.
Rng substream(uint64_t root_seed, std::string_view name, uint64_t index = 0);

/// In-place Fisher-Yates shuffle driven by the given generator.
template <typename T, typename Vec>
void shuffle(Vec& v, T& rng) {
  for (size_t i = v.size(); i > 1; --i) {
    size_t j = rng.below(static_cast<uint32_t>(i));
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace gardin
