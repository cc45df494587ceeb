#include "taskrec/threading.hpp"

#include <exception>
#include <thread>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace taskrec {

int effective_threads(int requested) {
    if (requested > 0) return requested;
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
#endif
}

void parallel_rows(std::size_t n, int threads, const std::function<void(std::size_t)>& body) {
    if (n == 0) return;
    std::vector<std::exception_ptr> errors(n);
#ifdef _OPENMP
    const int k = effective_threads(threads);
#pragma omp parallel for schedule(static) num_threads(k)
    for (long long i = 0; i < static_cast<long long>(n); ++i) {
        try {
            body(static_cast<std::size_t>(i));
        } catch (...) {
            errors[static_cast<std::size_t>(i)] = std::current_exception();
        }
    }
#else
    (void)threads;
    for (std::size_t i = 0; i < n; ++i) {
        try {
            body(i);
        } catch (...) {
            errors[i] = std::current_exception();
        }
    }
#endif
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

} // namespace taskrec
