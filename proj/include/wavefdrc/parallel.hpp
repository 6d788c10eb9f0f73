#pragma once
// Minimal fork-join helper. FDRC_THREADS caps the worker count.

#include <cstddef>
#include <functional>

namespace wavefdrc {

/// Worker count: FDRC_THREADS if set to a positive integer, else hardware concurrency.
unsigned thread_count();

/// Runs body(k) for k in [0, n) on up to thread_count() threads; indices are
/// split into contiguous blocks. Rethrows the exception of the lowest failing index.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace wavefdrc
