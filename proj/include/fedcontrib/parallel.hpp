#pragma once

#include <functional>

namespace fedcontrib {

// Number of worker threads used by parallel_for. Honors the FEDCONTRIB_THREADS
// environment variable (read once); otherwise hardware concurrency.
int thread_budget();

// Runs fn(0) ... fn(n-1) across the thread budget. Tasks must be independent;
// callers that accumulate results do so into per-index slots so reduction
// order (and therefore report bytes) never depends on scheduling.
void parallel_for(int n, const std::function<void(int)>& fn);

} // namespace fedcontrib
