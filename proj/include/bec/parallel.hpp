#pragma once

#include <cstddef>
#include <functional>

namespace bec {

/// Worker count used by parallel_for. Results never depend on it: every
/// caller writes into per-index slots and reduces sequentially afterwards.
void set_thread_count(int n);
int thread_count();

/// Calls fn(i) for i in [0, n), split into contiguous blocks across workers.
/// The first exception thrown by any worker is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace bec
