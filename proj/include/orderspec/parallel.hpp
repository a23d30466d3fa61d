#pragma once

#include <cstddef>
#include <functional>

namespace orderspec {

/// 0 means "all hardware threads".
unsigned resolve_threads(unsigned requested);

/// Runs body(i) for i in [0, n) on up to `threads` workers. Work items must
/// write to disjoint outputs; the first exception thrown is rethrown after
/// all workers finish.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& body);

}  // namespace orderspec
