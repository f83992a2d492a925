#pragma once

// Deterministic parallel loop: work items are pure functions of their index
// and write only to their own slots, so results are identical for any
// thread count. NEVLAB_THREADS overrides the default.

#include <cstdlib>
#include <cstdint>
#include <string>
#include <thread>
#include <vector>

namespace nevlab {

inline unsigned resolve_threads(unsigned requested = 0) {
    if (const char* env = std::getenv("NEVLAB_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v >= 1) return static_cast<unsigned>(v);
    }
    if (requested >= 1) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

template <class F>
void parallel_for(std::uint64_t n, F&& body, unsigned threads = 0) {
    const unsigned nt = resolve_threads(threads);
    if (nt <= 1 || n < 2) {
        for (std::uint64_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(nt);
    const std::uint64_t chunk = (n + nt - 1) / nt;
    for (unsigned t = 0; t < nt; ++t) {
        const std::uint64_t lo = t * chunk;
        const std::uint64_t hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &body] {
            for (std::uint64_t i = lo; i < hi; ++i) body(i);
        });
    }
    for (auto& th : pool) th.join();
}

} // namespace nevlab
