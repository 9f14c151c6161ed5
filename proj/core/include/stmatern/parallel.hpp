#pragma once

#include <cstddef>
#include <functional>

namespace stmatern {

/// Worker count used by parallel_for when threads == 0; defaults to the
/// hardware concurrency.
void set_default_threads(unsigned n);
unsigned default_threads();

/// Calls f(i) for i in [0, n) on a pool of threads. Output ordering is the
/// caller's responsibility (write to slot i). If any call throws, the
/// exception from the smallest failing index is rethrown after all workers
/// finish.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& f, unsigned threads = 0);

}  // namespace stmatern
