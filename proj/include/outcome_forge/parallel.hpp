#pragma once

#include <cstddef>
#include <functional>

namespace outcome_forge {

/// Worker count from OUTCOME_FORGE_THREADS, else hardware concurrency (at least 1).
std::size_t default_thread_count();

/// Runs body(i) for i in [0, n) on up to `threads` workers (0 = default_thread_count()).
/// Each index runs exactly once; callers write results into per-index slots so the
/// outcome is independent of scheduling. The first exception thrown is rethrown.
void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& body);

}  // namespace outcome_forge
