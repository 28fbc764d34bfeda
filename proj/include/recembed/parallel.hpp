#pragma once

#include <cstddef>
#include <functional>

namespace recembed {

/// Worker count: RECEMBED_THREADS when set and positive, otherwise the
/// hardware concurrency (at least 1).
unsigned default_thread_count();

/// Runs body(begin, end) over contiguous chunks of [0, n) on up to `threads`
/// threads. Chunk boundaries depend only on n and the thread count.
void parallel_chunks(std::size_t n, unsigned threads,
                     const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace recembed
