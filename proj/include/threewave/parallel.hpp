#pragma once

#include <cstddef>
#include <functional>

namespace threewave {

// 0 selects the hardware concurrency.
void set_thread_count(unsigned n);
unsigned thread_count();

// Runs body(i) for i in [0, n). Each index writes only its own output slot,
// so results do not depend on scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace threewave
