#pragma once

// The Green-function exhaustion. Level sets of the Green function play the
// role of balls: Delta(r) = { G(o, x) > level(r) } with
//
//   level(r) = 2A Int_0^inf e^{-r^2/at} / V_max(sqrt t) dt,
//
// g_r = G - level(r) its Dirichlet Green function, and pi_r the exit
// distribution on the boundary.
//
// On the radially symmetric models here the model Green function is
// evaluated as G(rho) = 2A * (tail integral at rho) — for C^m with the
// exact constants A = 1/(4^m m!), a = 4 this chain reproduces the closed
// form rho^{2-2m} / ((m-1) omega_{2m-1}) identically, and the boundary of
// Delta(r) sits at rho = r on every end.

#include <cmath>
#include <stdexcept>
#include <vector>

#include "nevlab/geometry.hpp"
#include "nevlab/heat_green.hpp"
#include "nevlab/numerics.hpp"
#include "nevlab/rng.hpp"

namespace nevlab {

// level(r); strictly decreasing, so level monotonicity is the literal
// nesting criterion for the exhaustion.
inline double exhaustion_level(const ConnectedSumModel& model, double r) {
    if (!(r > 0.0)) throw std::domain_error("exhaustion_level: r must be positive");
    const auto& c = model.constants();
    return 2.0 * c.A * tail_integral_vmax(model, c.a, 0, r);
}

// Model Green function at radial distance rho from o.
inline double green_model(const ConnectedSumModel& model, double rho_dist) {
    if (!(rho_dist > 0.0)) throw std::domain_error("green_model: pole at rho = 0");
    const auto& c = model.constants();
    return 2.0 * c.A * tail_integral_vmax(model, c.a, 0, rho_dist);
}

// Boundary radius of Delta(r) on an end: the root of G(rho) = level(r),
// solved by bisection (G is radially monotone on these models).
inline double boundary_radius(const ConnectedSumModel& model, double r) {
    const double lvl = exhaustion_level(model, r);
    const auto f = [&](double rho_dist) { return green_model(model, rho_dist) - lvl; };
    double lo = r, hi = r;
    // bracket around r; for the symmetric models the root is at r itself
    while (f(lo) < 0.0 && lo > 1e-12) lo *= 0.5;
    while (f(hi) > 0.0 && hi < 1e12) hi *= 2.0;
    if (lo == hi) return lo;
    return bisect_root(f, lo, hi);
}

// g_r(o, x) at radial distance rho; "rho outside the closure" is an error.
inline double g_r(const ConnectedSumModel& model, double rho_dist, double r) {
    if (!(r > 0.0)) throw std::domain_error("g_r: r must be positive");
    if (!(rho_dist > 0.0)) throw std::domain_error("g_r: pole at rho = 0");
    const double value = green_model(model, rho_dist) - exhaustion_level(model, r);
    if (value < 0.0) {
        if (value < -1e-9 * exhaustion_level(model, r))
            throw std::domain_error("g_r: point outside the closure of Delta(r)");
        return 0.0;
    }
    return value;
}

// Euclidean closed form g_r(z) = (||z||^{2-2m} - r^{2-2m}) / ((m-1) omega_{2m-1}).
inline double g_r_euclidean(double rho_dist, double r, int m) {
    if (!(rho_dist > 0.0)) throw std::domain_error("g_r_euclidean: pole at rho = 0");
    if (rho_dist > r * (1.0 + 1e-12)) throw std::domain_error("g_r_euclidean: point outside Delta(r)");
    return (std::pow(rho_dist, 2 - 2 * m) - std::pow(r, 2 - 2 * m)) / ((m - 1) * unit_sphere_area(2 * m));
}

// g_r on the inner sphere boundary of Delta(t), 0 < t <= r:
// 2A Int (e^{-t^2/as} - e^{-r^2/as}) / V_max(sqrt s) ds = level(t) - level(r).
inline double g_r_on_inner_sphere(const ConnectedSumModel& model, double t, double r) {
    if (!(t > 0.0) || t > r) throw std::domain_error("g_r_on_inner_sphere: need 0 < t <= r");
    return exhaustion_level(model, t) - exhaustion_level(model, r);
}

// Smallest r with K inside Delta(r): level(r) must fall below the Green
// function's minimum over the seam, which on these models is G at the seam
// distance. Computed once per model.
inline double containment_threshold(const ConnectedSumModel& model) {
    if (model.pure_euclidean()) return 0.0;
    const double seam_rho = 2.0 * model.central_radius(); // max distance within o's chart to the seam
    const double g_seam = green_model(model, seam_rho);
    const auto f = [&](double r) { return exhaustion_level(model, r) - g_seam; };
    double hi = seam_rho;
    while (f(hi) > 0.0 && hi < 1e9) hi *= 2.0;
    return bisect_root(f, 1e-6 * seam_rho, hi);
}

// The harmonic measure of Delta(r) on the Euclidean model: the uniform
// probability measure on the sphere of radius r about o. Provides the
// density against the area element and a deterministic sampler.
struct HarmonicMeasureEuclidean {
    int m = 2;       // complex dimension
    double r = 1.0;  // sphere radius
    std::vector<double> center; // o, dimension 2m

    double total_mass() const { return 1.0; }

    double density_vs_area() const { return 1.0 / (unit_sphere_area(2 * m) * std::pow(r, 2 * m - 1)); }

    // point on the sphere; Gaussian direction from a counter-based stream
    std::vector<double> sample(const RngStream& stream, std::uint64_t index) const {
        const int n = 2 * m;
        std::vector<double> x(n);
        double norm2 = 0.0;
        for (int i = 0; i < n; i += 2) {
            double g0, g1;
            stream.normal_pair(index * (n / 2) + i / 2, g0, g1);
            x[i] = g0;
            x[i + 1] = g1;
            norm2 += g0 * g0 + g1 * g1;
        }
        const double scale = r / std::sqrt(norm2);
        for (int i = 0; i < n; ++i) x[i] = center.empty() ? x[i] * scale : center[i] + x[i] * scale;
        return x;
    }
};

inline HarmonicMeasureEuclidean harmonic_measure_euclidean(int m, double r, std::vector<double> center = {}) {
    if (!(r > 0.0)) throw std::domain_error("harmonic_measure_euclidean: r must be positive");
    if (!center.empty() && center.size() != static_cast<std::size_t>(2 * m))
        throw std::invalid_argument("harmonic_measure_euclidean: wrong center dimension");
    return {m, r, std::move(center)};
}

struct GradientBoundReport {
    double bound = 0.0;          // c1 (|kappa| + 1/r) * tail
    double exact = 0.0;          // exact Euclidean value, if compare mode applies
    double admissible_c1 = 0.0;  // smallest c1 making the bound hold against the exact value
};

// ||grad g_r|| <= c1 (|kappa| + r^{-1}) Int e^{-r^2/bt} / V_min(sqrt t) dt on
// the boundary, valid once K sits inside Delta(r). Compare mode (pure
// Euclidean models) also reports the exact gradient 2 rho^{1-2m}/omega_{2m-1}
// and the smallest admissible c1.
inline GradientBoundReport grad_green_bound(const ConnectedSumModel& model, double r, double c1) {
    if (!(r > 0.0)) throw std::domain_error("grad_green_bound: r must be positive");
    if (!model.pure_euclidean() && r < containment_threshold(model))
        throw std::domain_error("grad_green_bound: r below the K-containment threshold");
    const auto& c = model.constants();
    const double tail = tail_integral_vmin(model, c.b, 0, r);
    const double factor = (std::fabs(model.kappa()) + 1.0 / r) * tail;
    GradientBoundReport rep;
    rep.bound = c1 * factor;
    if (model.pure_euclidean()) {
        const int m = model.complex_dim();
        rep.exact = 2.0 * std::pow(r, 1 - 2 * m) / unit_sphere_area(2 * m);
        rep.admissible_c1 = rep.exact / factor;
    }
    return rep;
}

struct MeasureBoundReport {
    double density_bound = 0.0;  // c2 (|kappa| + 1/r) * tail, vs the area element
    double exact_density = 0.0;
    double admissible_c2 = 0.0;
    double mass_of_bound = 0.0;  // bound integrated over the boundary area
};

// d pi_r <= c2 (|kappa| + r^{-1}) Int e^{-r^2/bt} / V_min(sqrt t) dt d sigma_r.
inline MeasureBoundReport harmonic_measure_bound(const ConnectedSumModel& model, double r, double c2) {
    if (!(r > 0.0)) throw std::domain_error("harmonic_measure_bound: r must be positive");
    if (!model.pure_euclidean() && r < containment_threshold(model))
        throw std::domain_error("harmonic_measure_bound: r below the K-containment threshold");
    const auto& c = model.constants();
    const double tail = tail_integral_vmin(model, c.b, 0, r);
    const double factor = (std::fabs(model.kappa()) + 1.0 / r) * tail;
    MeasureBoundReport rep;
    rep.density_bound = c2 * factor;
    if (model.pure_euclidean()) {
        const int m = model.complex_dim();
        const double area = unit_sphere_area(2 * m) * std::pow(r, 2 * m - 1);
        rep.exact_density = 1.0 / area;
        rep.admissible_c2 = rep.exact_density / factor;
        rep.mass_of_bound = rep.density_bound * area;
    }
    return rep;
}

} // namespace nevlab
