#ifndef NMKDV_DETAIL_PARALLEL_HPP
#define NMKDV_DETAIL_PARALLEL_HPP

#include <exception>
#include <mutex>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace nmkdv::detail {

// Runs f(i) for i in [0, n). Work items must not share accumulators, so
// results do not depend on scheduling. The first exception is rethrown.
template<class F>
void parallel_for(long n, F&& f)
{
    std::exception_ptr err;
    std::mutex err_mutex;
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < n; ++i) {
        try {
            f(i);
        } catch (...) {
            std::lock_guard<std::mutex> lock(err_mutex);
            if (!err) err = std::current_exception();
        }
    }
    if (err) std::rethrow_exception(err);
}

inline void set_threads(int n)
{
#ifdef _OPENMP
    if (n > 0) omp_set_num_threads(n);
#else
    (void)n;
#endif
}

inline int max_threads()
{
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

} // namespace nmkdv::detail

#endif
