#pragma once

#include <cstddef>
#include <functional>

namespace coarse {

// Upper bound on worker threads used by internal data-parallel loops.
// 0 means "use hardware concurrency".
void set_thread_count(unsigned n);
unsigned thread_count();

// Runs body(worker, begin, end) over contiguous chunks of [0, n). Chunk
// boundaries depend only on n and the worker count, so reductions performed
// per worker and merged in worker order are deterministic.
void parallel_chunks(std::size_t n,
                     const std::function<void(unsigned worker, std::size_t begin,
                                              std::size_t end)>& body);

}  // namespace coarse
