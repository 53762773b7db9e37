#ifndef DUQ_THREADS_HPP
#define DUQ_THREADS_HPP

#include <cstdint>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace duq {

// requested <= 0 means "library default" (all available cores).
inline int effective_threads(int requested) {
#ifdef _OPENMP
  return requested <= 0 ? omp_get_max_threads() : requested;
#else
  (void)requested;
  return 1;
#endif
}

// Index-parallel loop. Iterations must be independent and write only to
// per-index slots, so results are identical for any thread count. Exceptions
// must not escape fn when running parallel; batch callers catch per index.
template <typename Fn>
void parallel_for(std::int64_t n, int threads, Fn&& fn) {
#ifdef _OPENMP
  const int nt = effective_threads(threads);
  if (nt > 1 && n > 1) {
#pragma omp parallel for schedule(dynamic, 1) num_threads(nt)
    for (std::int64_t i = 0; i < n; ++i) fn(i);
    return;
  }
#else
  (void)threads;
#endif
  for (std::int64_t i = 0; i < n; ++i) fn(i);
}

// Serial reference loop, kept for A/B testing against parallel_for.
template <typename Fn>
void serial_for(std::int64_t n, Fn&& fn) {
  for (std::int64_t i = 0; i < n; ++i) fn(i);
}

}  // namespace duq

#endif
