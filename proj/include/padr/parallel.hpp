#pragma once

#include <cstddef>
#include <functional>

namespace padr {

/// Worker count: PADR_THREADS if set, else hardware concurrency; at least 1.
int thread_count();

/// Override the worker count for this process (0 restores the default).
void set_thread_count(int threads);

/// Calls fn(lo, hi) on disjoint contiguous chunks covering [begin, end).
/// Runs inline when the range is below `grain` or one worker is configured.
/// Chunk boundaries never affect results as long as fn writes only to its
/// own range.
void parallel_for(std::size_t begin, std::size_t end, std::size_t grain,
                  const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace padr
