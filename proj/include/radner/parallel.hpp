// SPDX-License-Identifier: MIT
#pragma once

#include <algorithm>
#include <cstdlib>
#include <thread>
#include <vector>

namespace radner {

/// Worker count: RADNER_THREADS when set and positive, otherwise 1.
/// Results are identical for any thread count — parallel loops only ever
/// write disjoint slots and all reductions stay sequential.
inline int thread_count() {
    static const int count = [] {
        if (const char* env = std::getenv("RADNER_THREADS")) {
            const int n = std::atoi(env);
            if (n > 0) return n;
        }
        return 1;
    }();
    return count;
}

/// Runs fn(begin..end) split into contiguous chunks across threads.
template <typename Fn>
void parallel_for(int begin, int end, Fn&& fn) {
    const int n = end - begin;
    const int threads = thread_count();
    if (threads <= 1 || n < 2 * threads) {
        for (int i = begin; i < end; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(threads);
    const int chunk = (n + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
        const int cb = begin + t * chunk;
        const int ce = std::min(end, cb + chunk);
        if (cb >= ce) break;
        pool.emplace_back([cb, ce, &fn] {
            for (int i = cb; i < ce; ++i) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace radner
