#pragma once

#include <cstddef>
#include <functional>

namespace lumen {

// Upper bound on worker threads used by row-parallel kernels. 0 means
// "use std::thread::hardware_concurrency()".
void set_thread_limit(std::size_t n);
std::size_t thread_limit();

/// Calls fn(begin, end) on disjoint contiguous chunks covering [0, n).
/// Each index is visited exactly once, so per-element results are
/// independent of the thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace lumen
