#pragma once

#include <cstdint>
#include <functional>

namespace gardin {

/// Persistent worker pool with deterministic static work splitting.
///
/// parallel_for splits [0, n) into one contiguous range per worker; each
/// index is processed by exactly one thread in ascending order inside its
/// range, so results never depend on scheduling. Thread count comes from
/// the GARDIN_THREADS environment variable, defaulting to the hardware
/// concurrency.
class ThreadPool {
 public:
  static ThreadPool& global();

  int size() const;

  /// fn(begin, end) is invoked once per non-empty range.
  void run(int64_t n, const std::function<void(int64_t, int64_t)>& fn);

  ~ThreadPool();
  ThreadPool(const ThreadPool&) = delete;
  ThreadPool& operator=(const ThreadPool&) = delete;

 private:
  explicit ThreadPool(int threads);
  struct Impl;
  Impl* impl_;
};

inline void parallel_for(int64_t n, const std::function<void(int64_t, int64_t)>& fn) {
  ThreadPool::global().run(n, fn);
}

}  // namespace gardin
