#pragma once

#include <algorithm>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace saddlefractal::detail {

// jobs: 1 = serial, 0 = library default thread count, n = n threads.
inline int resolve_jobs(int jobs) {
#ifdef _OPENMP
    if (jobs == 0) return omp_get_max_threads();
    return std::max(1, jobs);
#else
    (void)jobs;
    return 1;
#endif
}

} // namespace saddlefractal::detail
