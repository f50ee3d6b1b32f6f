#pragma once

#include <cstddef>
#include <functional>

namespace opstego {

/// Number of worker threads used by data-parallel stages. 0 selects
/// std::thread::hardware_concurrency().
void set_worker_threads(unsigned n);
unsigned worker_threads();

/// Runs body(i) for i in [0, n). Each index is processed exactly once; callers
/// write results into per-index slots so output never depends on scheduling.
/// The first exception thrown by any body is rethrown on the calling thread.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace opstego
