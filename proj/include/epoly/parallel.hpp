#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace epoly {

int default_threads();

// Runs body(i) for i in [0, n) on up to `threads` workers.  Results must be
// written by index so the outcome does not depend on scheduling.
template <class Body>
void parallel_for(size_t n, int threads, Body body) {
    const size_t w = std::min<size_t>(n, static_cast<size_t>(std::max(1, threads)));
    if (w <= 1) {
        for (size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<size_t> next{0};
    std::exception_ptr err;
    std::mutex m;
    std::vector<std::thread> pool;
    for (size_t k = 0; k < w; ++k)
        pool.emplace_back([&] {
            for (size_t i; (i = next++) < n;) {
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lk(m);
                    if (!err) err = std::current_exception();
                }
            }
        });
    for (auto& th : pool) th.join();
    if (err) std::rethrow_exception(err);
}

}  // namespace epoly
