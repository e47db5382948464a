#pragma once

#include <cstddef>
#include <functional>

namespace scatter3d {

/// Worker count: SCATTER3D_THREADS if set (>= 1), else hardware concurrency.
unsigned thread_count();

/// Runs body(worker, index) for index in [0, count); indices are dealt
/// round-robin so that worker w always sees w, w + T, w + 2T, ...
/// Results written to index-addressed slots are independent of T.
void parallel_for(std::size_t count,
                  const std::function<void(unsigned worker, std::size_t index)>& body,
                  unsigned workers = 0);

}  // namespace scatter3d
