#pragma once

#include <cstddef>
#include <functional>

namespace hazrisk {

// Worker count: HAZRISK_THREADS if set to a positive integer, otherwise the
// hardware concurrency (at least 1).
unsigned default_thread_count();

// Runs body(i) for i in [0, count) on up to `threads` workers. Each index is
// visited exactly once; callers write results into index-addressed slots so
// output never depends on scheduling. The first exception thrown by any body
// is rethrown after all workers join.
void parallel_for(std::size_t count, unsigned threads,
                  const std::function<void(std::size_t)>& body);

}  // namespace hazrisk
