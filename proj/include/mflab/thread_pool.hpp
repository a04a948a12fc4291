// Deterministic job-level parallelism.  Experiments parallelize only
// across independent grid/repetition jobs; each job derives its own
// random streams from (base seed, grid index, repetition) and writes
// into its own preallocated slot, so the result bytes are identical for
// every worker count.
#ifndef MFLAB_THREAD_POOL_HPP
#define MFLAB_THREAD_POOL_HPP

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

#include "mflab/types.hpp"

namespace mflab {

/// Runs fn(job) for job = 0..n_jobs−1 on up to `threads` workers.
/// fn must write only to state owned by its own job index.  The first
/// exception thrown by any job is rethrown to the caller after all
/// workers stop claiming new jobs.
inline void parallel_for(Index threads, Index n_jobs,
                         const std::function<void(Index)>& fn) {
  if (n_jobs <= 0) return;
  if (threads <= 1 || n_jobs == 1) {
    for (Index job = 0; job < n_jobs; ++job) fn(job);
    return;
  }
  const Index n_workers = std::min(threads, n_jobs);
  std::atomic<Index> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto worker = [&]() {
    while (!failed.load(std::memory_order_relaxed)) {
      const Index job = next.fetch_add(1, std::memory_order_relaxed);
      if (job >= n_jobs) return;
      try {
        fn(job);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        failed.store(true, std::memory_order_relaxed);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(std::size_t(n_workers));
  for (Index t = 0; t < n_workers; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace mflab

#endif  // MFLAB_THREAD_POOL_HPP
