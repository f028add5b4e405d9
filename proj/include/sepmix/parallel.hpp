#pragma once

#include <cstddef>
#include <functional>

namespace sepmix {

// Runs fn(i) for i in [0, count) on up to `threads` workers. Results must be
// written by index so the outcome does not depend on the worker count.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn);

// --threads value, else SEPMIX_THREADS, else 1
int resolve_threads(int requested);

}  // namespace sepmix
