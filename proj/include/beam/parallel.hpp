#pragma once

#include <cstddef>
#include <functional>

namespace beam {

/// Worker count: BEAM_THREADS if set to a positive integer, otherwise the
/// hardware concurrency (at least 1).
unsigned worker_count();

/// Runs body(i) for i in [0, count) on up to worker_count() threads. Each index
/// runs exactly once; the first exception thrown by any body is rethrown after
/// all workers have joined.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace beam
