#pragma once

#include <cstddef>
#include <functional>

namespace heavytail {

// Worker count: hardware concurrency, capped by HEAVYTAIL_THREADS if set.
int worker_count();

// Runs fn(i) for i in [0, n) on up to worker_count() threads. Tasks must
// write only to their own slots; the first exception thrown is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace heavytail
