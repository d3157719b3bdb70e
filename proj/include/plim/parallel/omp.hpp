#pragma once

#include <cstddef>
#if defined(_OPENMP)
#include <omp.h>
#endif

namespace plim::par {

enum class Exec { Serial, Parallel };

inline int max_threads() {
#if defined(_OPENMP)
  return ::omp_get_max_threads();
#else
  return 1;
#endif
}

inline bool in_parallel() {
#if defined(_OPENMP)
  return ::omp_in_parallel();
#else
  return false;
#endif
}

// Runs f(i) for i in [0, n). Serial when asked to, or when already inside a
// parallel region.
template <class F>
void for_each_index(Exec exec, std::ptrdiff_t n, F&& f, bool dynamic = false) {
  if (exec == Exec::Serial || in_parallel() || n < 2) {
    for (std::ptrdiff_t i = 0; i < n; ++i) f(i);
    return;
  }
  if (dynamic) {
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < n; ++i) f(i);
  } else {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) f(i);
  }
}

}  // namespace plim::par
