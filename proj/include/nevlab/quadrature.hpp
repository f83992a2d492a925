#pragma once

// Adaptive Gauss-Kronrod (G7/K15) quadrature with worst-interval-first
// refinement. All infinite integrals in this project are routed through
// here after a substitution that maps them to a finite window with
// exponentially decaying ends (see heat_green.hpp).

#include <cmath>
#include <queue>
#include <stdexcept>
#include <vector>

namespace nevlab {

struct QuadResult {
    double value = 0.0;
    double error = 0.0; // engine's own error estimate (absolute)
    int intervals = 0;
    bool converged = false;
};

namespace detail {

// G7K15 nodes (positive half) and weights.
struct GK15 {
    static constexpr double node[8] = {
        0.000000000000000, 0.207784955007898, 0.405845151377397, 0.586087235467691,
        0.741531185599394, 0.864864423359769, 0.949107912342759, 0.991455371120813};
    static constexpr double wk[8] = {
        0.209482141084728, 0.204432940075298, 0.190350578064785, 0.169004726639267,
        0.140653259715525, 0.104790010322250, 0.063092092629979, 0.022935322010529};
    static constexpr double wg[4] = {
        0.417959183673469, 0.381830050505119, 0.279705391489277, 0.129484966168870};
};

template <class F>
void gk15(const F& f, double a, double b, double& value, double& err) {
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double f0 = f(mid);
    double k = GK15::wk[0] * f0;
    double g = GK15::wg[0] * f0;
    for (int i = 1; i < 8; ++i) {
        const double dx = half * GK15::node[i];
        const double fs = f(mid + dx) + f(mid - dx);
        k += GK15::wk[i] * fs;
        if (i % 2 == 0) g += GK15::wg[i / 2] * fs;
    }
    value = k * half;
    const double diff = std::fabs(k - g) * half;
    // standard QUADPACK-style sharpened estimate
    err = diff * std::sqrt(diff) * 200.0;
    if (err > diff) err = diff;
    if (err < 1e-17 * std::fabs(value)) err = 1e-17 * std::fabs(value);
}

struct Interval {
    double a, b, value, error;
    bool operator<(const Interval& o) const { return error < o.error; }
};

} // namespace detail

// Integrate f over the finite interval [a, b].
template <class F>
QuadResult integrate(const F& f, double a, double b, double rel_tol = 1e-12,
                     double abs_tol = 0.0, int max_intervals = 5000) {
    QuadResult out;
    if (a == b) {
        out.converged = true;
        return out;
    }
    std::priority_queue<detail::Interval> heap;
    detail::Interval root{a, b, 0.0, 0.0};
    detail::gk15(f, a, b, root.value, root.error);
    heap.push(root);
    double total = root.value, toterr = root.error;
    int n = 1;
    while (n < max_intervals) {
        if (toterr <= rel_tol * std::fabs(total) || toterr <= abs_tol) break;
        detail::Interval worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (mid == worst.a || mid == worst.b) {
            heap.push(worst); // interval exhausted at double precision
            break;
        }
        detail::Interval left{worst.a, mid, 0.0, 0.0}, right{mid, worst.b, 0.0, 0.0};
        detail::gk15(f, left.a, left.b, left.value, left.error);
        detail::gk15(f, right.a, right.b, right.value, right.error);
        total += left.value + right.value - worst.value;
        toterr += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        ++n;
    }
    // re-accumulate from the heap for a tighter error sum
    double v = 0.0, e = 0.0;
    while (!heap.empty()) {
        v += heap.top().value;
        e += heap.top().error;
        heap.pop();
    }
    out.value = v;
    out.error = e;
    out.intervals = n;
    out.converged = (e <= rel_tol * std::fabs(v) || e <= abs_tol || std::fabs(v) == 0.0);
    return out;
}

// Integrate a positive, eventually-decaying integrand over [a, infinity):
// marches in doubling windows until the window contribution falls below
// the cutoff relative to the accumulated value.
template <class F>
QuadResult integrate_to_infinity(const F& f, double a, double rel_tol = 1e-12,
                                 double window0 = 1.0, double cutoff = 1e-16,
                                 int max_windows = 128) {
    QuadResult out;
    double lo = a, w = window0;
    for (int i = 0; i < max_windows; ++i) {
        const QuadResult part = integrate(f, lo, lo + w, rel_tol);
        out.value += part.value;
        out.error += part.error;
        out.intervals += part.intervals;
        lo += w;
        w *= 2.0;
        if (i > 2 && std::fabs(part.value) < cutoff * std::fabs(out.value)) {
            out.converged = true;
            return out;
        }
    }
    out.converged = false;
    return out;
}

} // namespace nevlab
