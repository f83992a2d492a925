#pragma once

// Counter-based random streams. Every variate is a pure function of
// (seed, stream name, counter), so parallel consumers draw identical
// numbers regardless of scheduling, and a run is reproducible from the
// single config seed.

#include <cmath>
#include <cstdint>
#include <string_view>

namespace nevlab {

namespace detail {

// splitmix64 finalizer, applied twice for counter decorrelation.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

} // namespace detail

// A stateless stream: key = f(seed, name, instance). instance is used for
// per-path / per-replicate substreams.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::string_view name, std::uint64_t instance = 0)
        : key_(detail::mix64(detail::mix64(seed ^ detail::fnv1a(name)) ^ instance)) {}

    std::uint64_t bits(std::uint64_t counter) const {
        return detail::mix64(detail::mix64(key_ ^ counter) + 0x632be59bd9b4e019ULL);
    }

    // uniform in (0,1); never returns 0 or 1 exactly
    double uniform(std::uint64_t counter) const {
        return (static_cast<double>(bits(counter) >> 11) + 0.5) * 0x1.0p-53;
    }

    // index uniform in [0, n)
    std::uint64_t pick(std::uint64_t counter, std::uint64_t n) const {
        return bits(counter) % n;
    }

    // Box-Muller pair from counters (2*counter, 2*counter+1)
    void normal_pair(std::uint64_t counter, double& n0, double& n1) const {
        const double u1 = uniform(2 * counter);
        const double u2 = uniform(2 * counter + 1);
        const double rad = std::sqrt(-2.0 * std::log(u1));
        const double ang = 6.283185307179586476925287 * u2;
        n0 = rad * std::cos(ang);
        n1 = rad * std::sin(ang);
    }

private:
    std::uint64_t key_;
};

} // namespace nevlab
