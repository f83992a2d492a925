#pragma once

// Low-discrepancy sampling for the ball and sphere integrals. Points come
// from a Halton sequence pushed through the normal quantile (directions)
// and per-shell radial inverse CDFs; replicates are Cranley-Patterson
// shifts drawn from the named stream "quadrature/jitter", which makes the
// estimates deterministic in the config seed and gives an honest spread
// for the error estimate.

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "nevlab/numerics.hpp"
#include "nevlab/rng.hpp"

namespace nevlab {

inline double halton(std::uint64_t index, unsigned base) {
    double x = 0.0, f = 1.0;
    std::uint64_t i = index + 1; // skip the zero point
    while (i > 0) {
        f /= base;
        x += f * static_cast<double>(i % base);
        i /= base;
    }
    return x;
}

inline constexpr unsigned kHaltonBases[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};

// One Cranley-Patterson replicate: dims-dimensional shifted Halton points.
class ShiftedHalton {
public:
    ShiftedHalton(unsigned dims, std::uint64_t seed, std::uint64_t replicate) : dims_(dims) {
        if (dims > sizeof(kHaltonBases) / sizeof(kHaltonBases[0]))
            throw std::invalid_argument("ShiftedHalton: too many dimensions");
        const RngStream jitter(seed, "quadrature/jitter", replicate);
        shift_.resize(dims);
        for (unsigned d = 0; d < dims; ++d) shift_[d] = jitter.uniform(d);
    }

    // coordinate d of point i, in (0,1)
    double coord(std::uint64_t i, unsigned d) const {
        double u = halton(i, kHaltonBases[d]) + shift_[d];
        if (u >= 1.0) u -= 1.0;
        // keep strictly inside (0,1) for quantile transforms
        return std::min(std::max(u, 1e-15), 1.0 - 1e-15);
    }

    unsigned dims() const { return dims_; }

private:
    unsigned dims_;
    std::vector<double> shift_;
};

// Unit direction in R^n from n quasi-uniform coordinates.
inline void qmc_direction(const ShiftedHalton& pts, std::uint64_t i, unsigned first_dim, int n,
                          std::vector<double>& out) {
    out.resize(n);
    double norm2 = 0.0;
    for (int d = 0; d < n; ++d) {
        const double g = normal_quantile(pts.coord(i, first_dim + d));
        out[d] = g;
        norm2 += g * g;
    }
    const double inv = 1.0 / std::sqrt(norm2);
    for (int d = 0; d < n; ++d) out[d] *= inv;
}

struct QmcEstimate {
    double value = 0.0;
    double std_error = 0.0;
};

// Average of f over the sphere of radius r about center in R^n.
// f sees absolute coordinates. n_points total across `replicates` shifts.
template <class F>
QmcEstimate sphere_average(const F& f, int n, double r, std::span<const double> center,
                           std::uint64_t n_points, unsigned replicates, std::uint64_t seed) {
    if (replicates < 2) throw std::invalid_argument("sphere_average: need >= 2 replicates");
    const std::uint64_t per = std::max<std::uint64_t>(1, n_points / replicates);
    std::vector<double> rep_means(replicates);
    std::vector<double> dir, z(n);
    for (unsigned j = 0; j < replicates; ++j) {
        const ShiftedHalton pts(n, seed, j);
        double acc = 0.0;
        for (std::uint64_t i = 0; i < per; ++i) {
            qmc_direction(pts, i, 0, n, dir);
            for (int d = 0; d < n; ++d) z[d] = center[d] + r * dir[d];
            acc += f(z);
        }
        rep_means[j] = acc / static_cast<double>(per);
    }
    QmcEstimate est;
    est.value = mean(rep_means);
    est.std_error = std::sqrt(sample_variance(rep_means) / static_cast<double>(replicates));
    return est;
}

} // namespace nevlab
