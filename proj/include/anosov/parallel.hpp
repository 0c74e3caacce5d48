#pragma once
// Data-parallel map over an index range with deterministic, index-ordered
// results. Work items must be pure; the reduction order never depends on the
// worker count.

#include <atomic>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace anosov {

inline int default_workers() {
    if (const char* env = std::getenv("ANOSOV_LAB_WORKERS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc > 0 ? static_cast<int>(hc) : 1;
}

template <typename R>
std::vector<R> parallel_map(std::size_t n, const std::function<R(std::size_t)>& work,
                            int workers = 0) {
    if (workers <= 0) workers = default_workers();
    std::vector<R> out(n);
    if (workers == 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) out[i] = work(i);
        return out;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n) return;
                out[i] = work(i);
            }
        });
    for (auto& th : pool) th.join();
    return out;
}

}  // namespace anosov
