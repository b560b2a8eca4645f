#pragma once

#include <functional>

namespace corrkit {

// Runs body(0..n-1) across at most n_threads workers. Each index owns its
// output slot, so results are identical to the sequential order regardless of
// thread count — thread count must never change numerics. n_threads <= 1 runs
// inline. Exceptions are captured and the first one (lowest index) rethrown.
void parallel_for(int n, int n_threads, const std::function<void(int)>& body);

}  // namespace corrkit
