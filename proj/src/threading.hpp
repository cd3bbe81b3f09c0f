#pragma once

#include <cstddef>
#include <functional>

namespace shmvdr {

// Runs fn(i) for i in [0, count) across up to `threads` workers (0 = hardware
// concurrency). Work items must write to disjoint state; results are identical
// to a serial loop regardless of scheduling.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn, int threads = 0);

}  // namespace shmvdr
