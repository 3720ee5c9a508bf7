#pragma once

#include <cstddef>
#include <functional>

namespace freeito {

// Worker count: `requested` if positive, else FREEITO_THREADS, else the
// hardware concurrency.
int resolve_threads(int requested = 0);

// Sets the default used when verify routines are not given an explicit count.
void set_default_threads(int threads);
int default_threads();

// Runs body(i) for i in [0, count) on up to `threads` workers. Callers store
// results by index and reduce in index order, so output does not depend on
// scheduling. The exception from the lowest failing index is rethrown.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& body);

}  // namespace freeito
