#pragma once

#include <cstddef>
#include <functional>

namespace fermi {

// Worker count: FERMI_THREADS if set to a positive integer, else the hardware concurrency.
unsigned thread_count();
void set_thread_count(unsigned n);  // 0 restores the default

// Runs body(i) for i in [0, n).  Callers write into per-index slots and reduce
// in index order afterwards, so results do not depend on scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace fermi
