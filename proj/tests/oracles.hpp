#pragma once

// Test-only oracles, independent of the implementation paths they check:
// fixed-order Gauss-Legendre quadrature, the Beta-distribution reduction of
// sphere averages for single-coordinate integrands, the Ahlfors-Shimizu
// route for the characteristic function, and brute-force seam search for
// the glued distances.

#include <cmath>
#include <complex>
#include <functional>
#include <vector>

#include "nevlab/numerics.hpp"

namespace oracles {

// 64-node Gauss-Legendre on [a, b], optionally composite over n panels.
template <class F>
double gauss_legendre(const F& f, double a, double b, int panels = 1) {
    static const int N = 64;
    static std::vector<double> nodes, weights;
    if (nodes.empty()) {
        // Newton iteration on Legendre P_N
        for (int i = 0; i < N; ++i) {
            double x = std::cos(nevlab::kPi * (i + 0.75) / (N + 0.5));
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0, p1 = x;
                for (int k = 2; k <= N; ++k) {
                    const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                const double dp = N * (x * p1 - p0) / (x * x - 1.0);
                const double dx = p1 / dp;
                x -= dx;
                if (std::fabs(dx) < 1e-15) break;
            }
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= N; ++k) {
                const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            const double dp = N * (x * p1 - p0) / (x * x - 1.0);
            nodes.push_back(x);
            weights.push_back(2.0 / ((1.0 - x * x) * dp * dp));
        }
    }
    double total = 0.0;
    const double width = (b - a) / panels;
    for (int p = 0; p < panels; ++p) {
        const double lo = a + p * width, mid = lo + 0.5 * width, half = 0.5 * width;
        double acc = 0.0;
        for (int i = 0; i < N; ++i) acc += weights[i] * f(mid + half * nodes[i]);
        total += acc * half;
    }
    return total;
}

// Average over the sphere S^3(center, r) in C^2 of an integrand that
// depends only on z1: on the unit sphere |u1|^2 is uniform on [0,1] with
// uniform phase, so the average is a 2-D integral.
inline double sphere_avg_z1(const std::function<double(std::complex<double>)>& f, double r,
                            std::complex<double> center_z1, int phase_nodes = 256) {
    const auto radial = [&](double v) {
        double acc = 0.0;
        for (int k = 0; k < phase_nodes; ++k) {
            const double th = 2.0 * nevlab::kPi * (k + 0.5) / phase_nodes;
            const std::complex<double> z1 =
                center_z1 + r * std::sqrt(v) * std::complex<double>(std::cos(th), std::sin(th));
            acc += f(z1);
        }
        return acc / phase_nodes;
    };
    return gauss_legendre(radial, 0.0, 1.0, 8);
}

// Ahlfors-Shimizu route for T of f = z1 on C^2 with base point o = (o1, 0):
//   T(r) = Int_0^r t^{-3} I(t) dt,
//   I(t) = Int_{B(o,t)} dd^c log(1+|z1|^2) ^ alpha
//        = (1/pi) Int_{|z1-o1|<t} (1+|z1|^2)^{-2} (t^2 - |z1-o1|^2) dA(z1),
// independent of the Green-weighted ball quadrature in the library.
inline double ahlfors_shimizu_T(double r, std::complex<double> o1) {
    const auto inner = [&](double t) {
        const auto radial = [&](double s) {
            double acc = 0.0;
            const int K = 128;
            for (int k = 0; k < K; ++k) {
                const double th = 2.0 * nevlab::kPi * (k + 0.5) / K;
                const std::complex<double> z1 =
                    o1 + s * std::complex<double>(std::cos(th), std::sin(th));
                const double w = 1.0 + std::norm(z1);
                acc += 1.0 / (w * w);
            }
            return (acc / K) * (t * t - s * s) * s;
        };
        return 2.0 * gauss_legendre(radial, 0.0, t, 4); // (1/pi) * 2 pi s ds
    };
    const auto outer = [&](double t) { return inner(t) / (t * t * t); };
    return gauss_legendre(outer, 1e-6, r, 16);
}

} // namespace oracles
