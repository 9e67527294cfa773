#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <thread>
#include <vector>

namespace sdelab {

/// Worker-thread budget: explicit request, else SDE_WEAK_LAB_THREADS, else
/// the hardware concurrency.
int resolve_threads(int requested);

/// Runs fn(begin, end, chunk_index) over [0, total) split into fixed-size
/// chunks. Chunk boundaries depend only on (total, chunk_size), never on the
/// thread count, so per-chunk results can be reduced in index order to give
/// bit-identical totals on any number of workers.
void parallel_chunks(long long total, long long chunk_size, int threads,
                     const std::function<void(long long, long long, std::size_t)>& fn);

inline std::size_t chunk_count(long long total, long long chunk_size) {
    return total <= 0 ? 0
                      : static_cast<std::size_t>((total + chunk_size - 1) / chunk_size);
}

}  // namespace sdelab
