// Chunked parallel loop over an index range. Results must be written to
// per-index slots so the output is independent of the thread count; the
// FERMI_THREADS environment variable caps the pool.
#pragma once

#include <atomic>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace fermi {

inline unsigned parallel_threads() {
    unsigned n = std::thread::hardware_concurrency();
    if (n == 0) n = 1;
    if (const char* env = std::getenv("FERMI_THREADS")) {
        const long cap = std::atol(env);
        if (cap >= 1 && static_cast<unsigned>(cap) < n) n = static_cast<unsigned>(cap);
    }
    return n;
}

inline void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body) {
    const unsigned threads = parallel_threads();
    if (threads <= 1 || count < 2) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t)
        pool.emplace_back([&]() {
            for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) body(i);
        });
    for (auto& th : pool) th.join();
}

} // namespace fermi
