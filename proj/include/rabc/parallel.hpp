#pragma once

#include <cstddef>
#include <functional>

namespace rabc {

/// Runs fn(0..n-1) across up to `workers` threads. Callers must make the
/// body deterministic per index (derived substreams, disjoint writes);
/// results are then independent of the worker count. workers <= 1 runs
/// inline. The first exception thrown by any index is rethrown.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn);

/// Default worker count (hardware concurrency, at least 1).
int default_workers();

}  // namespace rabc
