#pragma once

#include <functional>

namespace tandem {

// Caps the worker pool used by parallel_for. 0 picks the hardware
// concurrency. All callers must produce results that are independent of the
// worker count; reductions happen in fixed order outside the pool.
void set_worker_count(int n);
int worker_count();

// Runs task(i) for i in [0, n). Tasks must be independent; completion order
// is unspecified but the call returns only after all tasks finish.
void parallel_for(int n, const std::function<void(int)>& task);

}  // namespace tandem
