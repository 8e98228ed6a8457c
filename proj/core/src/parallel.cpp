#include "gardin/parallel.hpp"

#include <atomic>
#include <condition_variable>
#include <cstdlib>
#include <mutex>
#include <thread>
#include <vector>

#if defined(__GLIBC__)
#include <malloc.h>
#endif

namespace gardin {
namespace {

// Training allocates and frees multi-megabyte tensors every layer; with the
// default glibc thresholds each one becomes an mmap/munmap pair plus a page
// fault storm on first touch (measured ~3x slowdown of the whole forward
// pass). Keep large blocks on the heap so they get reused.
void tune_allocator() {
#if defined(__GLIBC__)
  mallopt(M_MMAP_THRESHOLD, 1 << 30);
  mallopt(M_TRIM_THRESHOLD, 1 << 30);
#endif
}

}  // namespace

struct ThreadPool::Impl {
  int nthreads;
  std::vector<std::thread> workers;

  // one job at a time; concurrent callers (e.g. two threads scoring with
  // the same trained model) queue up here rather than racing on the job slot
  std::mutex run_mu;

  std::mutex mu;
  std::condition_variable cv_work;
  std::condition_variable cv_done;
  uint64_t generation = 0;
  const std::function<void(int64_t, int64_t)>* job = nullptr;
  int64_t job_n = 0;
  int pending = 0;
  bool stop = false;

  void worker_loop(int rank) {
    uint64_t seen = 0;
    for (;;) {
      const std::function<void(int64_t, int64_t)>* fn = nullptr;
      int64_t n = 0;
      {
        std::unique_lock<std::mutex> lk(mu);
        cv_work.wait(lk, [&] { return stop || generation != seen; });
        if (stop) return;
        seen = generation;
        fn = job;
        n = job_n;
      }
      run_range(rank, n, *fn);
      {
        std::lock_guard<std::mutex> lk(mu);
        if (--pending == 0) cv_done.notify_all();
      }
    }
  }

  void run_range(int rank, int64_t n, const std::function<void(int64_t, int64_t)>& fn) {
    const int64_t chunk = (n + nthreads - 1) / nthreads;
    const int64_t begin = rank * chunk;
    const int64_t end = std::min<int64_t>(n, begin + chunk);
    if (begin < end) fn(begin, end);
  }
};

ThreadPool::ThreadPool(int threads) : impl_(new Impl) {
  impl_->nthreads = threads;
  for (int r = 1; r < threads; ++r) {
    impl_->workers.emplace_back([this, r] { impl_->worker_loop(r); });
  }
}

ThreadPool::~ThreadPool() {
  {
    std::lock_guard<std::mutex> lk(impl_->mu);
    impl_->stop = true;
  }
  impl_->cv_work.notify_all();
  for (auto& w : impl_->workers) w.join();
  delete impl_;
}

ThreadPool& ThreadPool::global() {
  static ThreadPool pool([] {
    tune_allocator();
    if (const char* env = std::getenv("GARDIN_THREADS")) {
      const int n = std::atoi(env);
      if (n >= 1) return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw ? static_cast<int>(hw) : 1;
  }());
  return pool;
}

int ThreadPool::size() const { return impl_->nthreads; }

void ThreadPool::run(int64_t n, const std::function<void(int64_t, int64_t)>& fn) {
  if (n <= 0) return;
  if (impl_->nthreads == 1 || n == 1) {
    fn(0, n);
    return;
  }
  std::lock_guard<std::mutex> serialize(impl_->run_mu);
  {
    std::lock_guard<std::mutex> lk(impl_->mu);
    impl_->job = &fn;
    impl_->job_n = n;
    impl_->pending = impl_->nthreads - 1;
    ++impl_->generation;
  }
  impl_->cv_work.notify_all();
  impl_->run_range(0, n, fn);
  std::unique_lock<std::mutex> lk(impl_->mu);
  impl_->cv_done.wait(lk, [&] { return impl_->pending == 0; });
}

}  // namespace gardin
