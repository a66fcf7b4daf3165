#pragma once

#include <cstddef>
#include <functional>

namespace bohm {

/// Worker count: `requested` when positive, otherwise BOHM_ERGO_THREADS, otherwise 1.
[[nodiscard]] std::size_t resolve_threads(int requested = 0);

/// Runs body(i) for i in [0, n) on `threads` workers. Indices are claimed
/// dynamically; callers write results by index so output order never
/// depends on scheduling. The first exception thrown by any body is
/// rethrown after all workers join.
void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& body);

}  // namespace bohm
