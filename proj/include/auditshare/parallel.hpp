#pragma once

#include <cstddef>
#include <functional>

namespace auditshare {

// Chunked index-parallel loop over hardware threads. Falls back to a plain
// loop for small n. fn must be safe on disjoint indices.
void parallel_for(size_t n, const std::function<void(size_t)>& fn);

}  // namespace auditshare
