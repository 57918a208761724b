#pragma once

#include <functional>

namespace gw {

// Thread count policy: a positive request wins, otherwise the GW_THREADS
// environment variable, otherwise hardware concurrency. Always >= 1.
int resolve_thread_count(int requested);

// Runs fn(0), ..., fn(count-1) across up to `threads` workers. Tasks must
// write to disjoint, pre-sized slots; the slot layout (not the schedule)
// is what keeps results deterministic. Exceptions from tasks are
// captured and the first one (by task index) is rethrown.
void parallel_for(int count, int threads, const std::function<void(int)>& fn);

}  // namespace gw
