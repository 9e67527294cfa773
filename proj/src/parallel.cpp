#include "sde_weak_lab/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <string>

namespace sdelab {

int resolve_threads(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("SDE_WEAK_LAB_THREADS")) {
        const int parsed = std::atoi(env);
        if (parsed > 0) return parsed;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

void parallel_chunks(long long total, long long chunk_size, int threads,
                     const std::function<void(long long, long long, std::size_t)>& fn) {
    if (total <= 0) return;
    if (chunk_size <= 0) chunk_size = total;
    const std::size_t n_chunks = chunk_count(total, chunk_size);
    threads = static_cast<int>(
        std::max<long long>(1, std::min<long long>(threads, static_cast<long long>(n_chunks))));

    if (threads == 1) {
        for (std::size_t c = 0; c < n_chunks; ++c) {
            const long long begin = static_cast<long long>(c) * chunk_size;
            const long long end = std::min(total, begin + chunk_size);
            fn(begin, end, c);
        }
        return;
    }

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            const std::size_t c = next.fetch_add(1, std::memory_order_relaxed);
            if (c >= n_chunks) return;
            const long long begin = static_cast<long long>(c) * chunk_size;
            const long long end = std::min(total, begin + chunk_size);
            fn(begin, end, c);
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
}

}  // namespace sdelab
