#pragma once

#include <cstddef>
#include <thread>
#include <vector>

namespace gruschin {

inline unsigned resolve_thread_count(unsigned requested) {
    if (requested > 0) return requested;
    unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? hw : 1;
}

// Runs fn(i) for i in [0, n). Each index writes only its own output slot,
// so results are identical for any worker count.
template <typename Fn>
void parallel_for_index(std::size_t n, unsigned n_threads, Fn&& fn) {
    n_threads = resolve_thread_count(n_threads);
    if (n_threads <= 1 || n < 2 * static_cast<std::size_t>(n_threads)) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    const std::size_t per = n / n_threads;
    for (unsigned w = 0; w < n_threads; ++w) {
        std::size_t lo = w * per;
        std::size_t hi = (w + 1 == n_threads) ? n : lo + per;
        pool.emplace_back([lo, hi, &fn] {
            for (std::size_t i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

} // namespace gruschin
