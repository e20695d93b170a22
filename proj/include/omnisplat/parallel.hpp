#pragma once

#include <cstddef>
#include <functional>

namespace omnisplat {

// Number of worker threads. Defaults to OMNISPLAT_THREADS if set, otherwise
// hardware concurrency.
int thread_count();
void set_thread_count(int n);

// Runs fn(begin, end) over [0, n) split into contiguous chunks, one chunk per
// worker. Chunks are disjoint, so writes to per-index data are race-free and
// the result is independent of the thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace omnisplat
