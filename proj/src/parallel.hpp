#pragma once

#include <algorithm>
#include <atomic>
#include <thread>
#include <vector>

namespace caustica::detail {

// Runs body(i) for i in [0, n) on up to `threads` workers.  Each index owns
// its output slot, so results never depend on scheduling.
template <class Body>
void parallel_for(int n, int threads, Body body) {
    threads = std::max(1, std::min(threads, n));
    if (threads == 1) {
        for (int i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(threads));
    for (int t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            for (int i = next++; i < n; i = next++) body(i);
        });
    for (auto& th : pool) th.join();
}

}  // namespace caustica::detail
