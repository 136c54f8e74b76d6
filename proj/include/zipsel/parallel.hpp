#pragma once

#include <cstddef>
#include <functional>

namespace zipsel {

/// requested == 0 resolves to the hardware concurrency (minimum 1).
unsigned resolve_thread_count(unsigned requested);

/// Runs fn over [0, n) split into contiguous chunks, one worker per chunk.
/// Workers write to disjoint ranges, so results are independent of the
/// thread count. fn(begin, end) must not throw across threads unhandled;
/// exceptions are rethrown on the calling thread.
void parallel_for(std::size_t n, unsigned threads,
                  const std::function<void(std::size_t, std::size_t)>& fn);

} // namespace zipsel
