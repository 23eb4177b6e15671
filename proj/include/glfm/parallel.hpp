#pragma once

#include <cstddef>
#include <functional>

namespace glfm {

/// Worker thread count: hardware concurrency capped by the GLFM_THREADS
/// environment variable (>= 1).
std::size_t worker_count();

/// Runs fn(i) for every i in [0, n). Results must not depend on scheduling:
/// each index writes only its own output slots. Exceptions from workers are
/// rethrown on the calling thread.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace glfm
