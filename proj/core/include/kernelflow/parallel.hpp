#pragma once

#include <cstddef>
#include <functional>

namespace kernelflow {

/// Worker cap: KERNELFLOW_THREADS if set (minimum 1), else hardware concurrency.
std::size_t max_threads();

/// Run fn(i) for i in [0, count) across up to max_threads() workers. Each
/// index writes only its own slot, so results reduce deterministically.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

}  // namespace kernelflow
