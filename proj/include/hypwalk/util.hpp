#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <thread>
#include <vector>

namespace hypwalk {

// Static round-robin-free block partition; fn(i) must write only to
// index-i slots so results are identical for any thread count.
inline void parallelFor(size_t n, int threads, const std::function<void(size_t)>& fn) {
    if (threads <= 1 || n < 2) {
        for (size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    size_t t = std::min<size_t>(static_cast<size_t>(threads), n);
    std::atomic<size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(t);
    const size_t chunk = std::max<size_t>(1, n / (t * 8));
    for (size_t w = 0; w < t; ++w) {
        pool.emplace_back([&]() {
            for (;;) {
                size_t start = next.fetch_add(chunk);
                if (start >= n) return;
                size_t end = std::min(n, start + chunk);
                for (size_t i = start; i < end; ++i) fn(i);
            }
        });
    }
    for (auto& th : pool) th.join();
}

inline uint64_t fnv1a64(const std::string& s) {
    uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

}  // namespace hypwalk
