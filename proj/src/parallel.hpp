#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace knudsen::detail {

inline unsigned resolve_workers(unsigned workers, std::size_t n) {
    if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
    return static_cast<unsigned>(
        std::clamp<std::size_t>(n / 1024 + 1, 1, workers));
}

// Runs body(worker, begin, end) over contiguous chunks of [0, n). The first
// exception thrown by any chunk is rethrown on the calling thread.
template <class Body>
void parallel_chunks(std::size_t n, unsigned workers, Body&& body) {
    const unsigned w = resolve_workers(workers, n);
    if (w == 1) {
        body(0u, std::size_t{0}, n);
        return;
    }
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(w);
    for (unsigned t = 0; t < w; ++t) {
        const std::size_t begin = n * t / w;
        const std::size_t end = n * (t + 1) / w;
        pool.emplace_back([&, t, begin, end] {
            try {
                body(t, begin, end);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace knudsen::detail
