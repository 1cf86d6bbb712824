#pragma once

#include <cstddef>
#include <functional>

namespace dioph {

/// Worker count: explicit value if > 0, else DIOPH_WORKERS, else 1.
unsigned resolve_workers(unsigned requested = 0);

/// Runs body(i) for i in [0, count) on up to `workers` threads. Each index
/// runs exactly once; callers write into per-index slots so the merged
/// result never depends on scheduling. The first exception thrown by any
/// body is rethrown after all threads join.
void parallel_for(std::size_t count, unsigned workers,
                  const std::function<void(std::size_t)>& body);

}  // namespace dioph
