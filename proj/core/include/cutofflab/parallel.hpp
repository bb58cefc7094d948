#pragma once

#include <cstddef>
#include <functional>

namespace cutofflab {

/// Number of worker threads used by parallel_for. Defaults to the
/// CUTOFFLAB_THREADS environment variable, else hardware concurrency.
std::size_t thread_count();

/// Overrides the worker count; 0 restores the default.
void set_thread_count(std::size_t n);

/// Calls body(i) for i in [0, n). Indices are split into contiguous blocks,
/// one per worker. Callers write results into slots indexed by i, so output
/// never depends on the worker count. The first exception thrown by any
/// body is rethrown on the calling thread.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace cutofflab
