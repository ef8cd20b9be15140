#pragma once

#include <cstddef>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace cgplan {

inline int hardware_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

// Static-scheduled index loop. Every call site writes results into
// index-addressed slots and seeds its RNG from the index, so the parallel
// schedule and the serial loop produce identical output.
template <class F>
void parallel_for(std::size_t n, F&& fn, bool parallel = true) {
#ifdef _OPENMP
    if (parallel && n > 1) {
#pragma omp parallel for schedule(static)
        for (long long i = 0; i < static_cast<long long>(n); ++i) {
            fn(static_cast<std::size_t>(i));
        }
        return;
    }
#else
    (void)parallel;
#endif
    for (std::size_t i = 0; i < n; ++i) fn(i);
}

}  // namespace cgplan
