#pragma once

#include <algorithm>
#include <thread>
#include <vector>

namespace hloss {

/// Runs body(i) for i in [0, n) on up to `threads` workers, each taking one
/// contiguous block. Callers store per-index results and reduce them in index
/// order afterwards, so results do not depend on the thread count.
template <typename Body>
void parallel_for(int n, int threads, Body&& body) {
    threads = std::clamp(threads, 1, std::max(n, 1));
    if (threads == 1) {
        for (int i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::thread> workers;
    workers.reserve(threads);
    const int block = (n + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
        const int begin = t * block;
        const int end = std::min(n, begin + block);
        if (begin >= end) break;
        workers.emplace_back([begin, end, &body] {
            for (int i = begin; i < end; ++i) body(i);
        });
    }
    for (auto& w : workers) w.join();
}

} // namespace hloss
