#pragma once

#include <cstddef>
#include <functional>

namespace kincal {

/// 0 or negative means std::thread::hardware_concurrency().
int resolve_threads(int requested);

/// Runs body(task) for task in [0, tasks) on up to `threads` workers. Tasks write to their
/// own slots; callers combine results in task order, so output does not depend on the
/// thread count.
void parallel_for(std::size_t tasks, int threads, const std::function<void(std::size_t)>& body);

}  // namespace kincal
