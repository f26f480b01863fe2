#pragma once

#include <cstddef>
#include <functional>

namespace vertexcalc {

// Worker count, capped by VERTEXCALC_THREADS when set.
std::size_t worker_count();

// Runs body(i) for i in [0, n); results must be written to per-index slots.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace vertexcalc
