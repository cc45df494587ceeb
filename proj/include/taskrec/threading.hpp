#pragma once

#include <cstddef>
#include <functional>

namespace taskrec {

struct FitOptions {
    int threads = 0; // 0 = use all hardware threads
};

int effective_threads(int requested);

// Runs body(row) for rows [0, n), possibly in parallel. Rows must write to
// disjoint state so the result is independent of the thread count. Exceptions
// are captured per row and the lowest-index one is rethrown after the loop.
void parallel_rows(std::size_t n, int threads, const std::function<void(std::size_t)>& body);

} // namespace taskrec
