#pragma once

#include <cstddef>
#include <functional>

namespace octbd {

/// Environment variable that caps the number of worker threads.
inline constexpr const char* kWorkersEnv = "OCTBD_WORKERS";

/// Worker count from OCTBD_WORKERS, else the hardware concurrency (at least 1).
std::size_t worker_count();

/// Runs body(i) for i in [0, n) across worker threads. Each index is visited
/// exactly once; callers write to disjoint slots so results do not depend on
/// scheduling. The first exception thrown by any body is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace octbd
