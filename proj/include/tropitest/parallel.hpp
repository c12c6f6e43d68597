#pragma once

#include <cstddef>
#include <functional>

namespace tropitest {

// Worker count: TROPITEST_THREADS when set to a positive integer, capped by
// the hardware concurrency; otherwise the hardware concurrency.
unsigned default_threads();

// Runs body(0..count-1) on up to `threads` workers (0 = default_threads());
// explicit counts are still capped by default_threads().
// The first exception thrown by any task is rethrown after all workers stop.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body,
                  unsigned threads = 0);

}  // namespace tropitest
