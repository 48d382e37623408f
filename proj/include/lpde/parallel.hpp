#pragma once

#include <functional>

namespace lpde {

/// Caps the worker count used by parallel_for; n <= 0 restores machine parallelism.
void set_thread_limit(int n);
int thread_limit();

/// Runs body(i) for i in [0, count). Work is partitioned statically, so any
/// caller-side reduction over i stays in index order. The exception thrown by
/// the lowest failing index is rethrown after all workers finish.
void parallel_for(int count, const std::function<void(int)>& body);

}  // namespace lpde
