#pragma once

// Value-distribution functionals on C^m (m >= 2) with the Green exhaustion
// Delta(r) = B(o, r), g_r(z) = (||z-o||^{2-2m} - r^{2-2m}) / ((m-1) w_{2m-1}):
//
//   T_f(r, L)  characteristic: Int g_r q(z) dv, q the normalized pullback
//              density of c_1(L, Fubini-Study) (stratified low-discrepancy
//              ball quadrature with exact radial Green weights)
//   m_f(r, D)  proximity: sphere average of log 1/||s_D(f)||
//   N_f(r, D)  counting: exact 1-D slice quadrature over the affine-linear
//              divisor preimages; Nbar = N for the reduced linear class
//
// plus the Xi and E(r) functionals, the first-main-theorem residual, the
// logarithmic-derivative and calculus-lemma verifications, Borel's
// exceptional-set estimate, the second-main-theorem margin evaluator and
// simple defects.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "nevlab/exhaustion.hpp"
#include "nevlab/geometry.hpp"
#include "nevlab/heat_green.hpp"
#include "nevlab/numerics.hpp"
#include "nevlab/parallel.hpp"
#include "nevlab/quadrature.hpp"
#include "nevlab/sampling.hpp"
#include "nevlab/test_map.hpp"

namespace nevlab {

struct QuadratureBudget {
    std::uint64_t ball_points = 40000;   // total across replicates
    std::uint64_t sphere_points = 40000; // total across replicates
    unsigned replicates = 8;
    unsigned shells = 48;
    double rel_tol = 1e-10; // 1-D quadrature tolerance
    unsigned threads = 0;
};

namespace detail {

// Radial antiderivative of the Green-weighted volume element:
//   Int g_r(rho) w_{2m-1} rho^{2m-1} d rho = (P(rho) - P(a)) / (m-1),
//   P(rho) = rho^2/2 - r^{2-2m} rho^{2m} / (2m).
inline double green_radial_antiderivative(double rho, double r, int m) {
    return 0.5 * rho * rho - std::pow(r, 2 - 2 * m) * std::pow(rho, 2 * m) / (2.0 * m);
}

inline double green_shell_weight(double a, double b, double r, int m) {
    return (green_radial_antiderivative(b, r, m) - green_radial_antiderivative(a, r, m)) / (m - 1);
}

// Inverse-CDF sample of the Green-weighted radial density on [a, b]
// (bisection; P' vanishes at rho = r, so Newton is avoided).
inline double sample_green_radius(double a, double b, double u, double r, int m) {
    const double pa = green_radial_antiderivative(a, r, m);
    const double pb = green_radial_antiderivative(b, r, m);
    const double target = pa + u * (pb - pa);
    double lo = a, hi = b;
    for (int i = 0; i < 60; ++i) {
        const double mid = 0.5 * (lo + hi);
        (green_radial_antiderivative(mid, r, m) < target ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace detail

// Int_{B(o,r)} g_r(||z-o||) q(z) dv for a continuous density q, by shells
// geometric in radius with radii importance-sampled from the exact Green
// radial law. The innermost ball is handled analytically with q(o).
template <class Density>
QmcEstimate green_ball_integral(const Density& q, int m, double r, const std::vector<Complex>& center,
                                const QuadratureBudget& budget, std::uint64_t seed) {
    const int n = 2 * m;
    const unsigned shells = std::max(8u, budget.shells);
    const unsigned reps = std::max(2u, budget.replicates);
    const std::uint64_t per = std::max<std::uint64_t>(8, budget.ball_points / (shells * reps));

    const double eps = 1e-3 * r;
    std::vector<double> edges(shells + 1);
    for (unsigned k = 0; k <= shells; ++k)
        edges[k] = eps * std::pow(r / eps, static_cast<double>(k) / shells);

    std::vector<double> center_real(n);
    for (int j = 0; j < m; ++j) {
        center_real[2 * j] = center[j].real();
        center_real[2 * j + 1] = center[j].imag();
    }

    // per (shell, replicate) means, filled independently
    std::vector<double> cell_mean(static_cast<std::size_t>(shells) * reps, 0.0);
    parallel_for(static_cast<std::uint64_t>(shells) * reps, [&](std::uint64_t cell) {
        const unsigned k = static_cast<unsigned>(cell / reps);
        const unsigned j = static_cast<unsigned>(cell % reps);
        const ShiftedHalton pts(n + 1, seed, j * 1000 + k);
        std::vector<double> dir;
        std::vector<Complex> z(m);
        double acc = 0.0;
        for (std::uint64_t i = 0; i < per; ++i) {
            const double rho_s = detail::sample_green_radius(edges[k], edges[k + 1], pts.coord(i, 0), r, m);
            qmc_direction(pts, i, 1, n, dir);
            for (int v = 0; v < m; ++v)
                z[v] = Complex(center_real[2 * v] + rho_s * dir[2 * v],
                               center_real[2 * v + 1] + rho_s * dir[2 * v + 1]);
            acc += q(z);
        }
        cell_mean[cell] = acc / static_cast<double>(per);
    }, budget.threads);

    QmcEstimate est;
    // analytic inner ball
    {
        std::vector<Complex> zc(center.begin(), center.end());
        est.value = detail::green_shell_weight(0.0, eps, r, m) * q(zc);
    }
    double var = 0.0;
    for (unsigned k = 0; k < shells; ++k) {
        const double w = detail::green_shell_weight(edges[k], edges[k + 1], r, m);
        std::vector<double> means(reps);
        for (unsigned j = 0; j < reps; ++j) means[j] = cell_mean[static_cast<std::size_t>(k) * reps + j];
        est.value += w * mean(means);
        var += w * w * sample_variance(means) / reps;
    }
    est.std_error = std::sqrt(var);
    return est;
}

// forward declaration; defined with the counting machinery below
inline double counting_slice(double delta, double r, int m, double rel_tol);

namespace detail {

// Detect f = [k : l(z)] with constant k != 0 and affine-linear l; returns
// the normalized coefficients of l/k.
inline bool affine_linear_to_p1(const TestMap& f, std::vector<Complex>& w, Complex& c0) {
    if (f.components.size() != 2) return false;
    const Polynomial& head = f.components[0];
    Complex k(0.0);
    for (const auto& t : head.terms()) {
        for (int e : t.exps)
            if (e != 0) return false;
        k += t.coeff;
    }
    if (k == Complex(0.0)) return false;
    w.assign(f.m, Complex(0.0));
    c0 = Complex(0.0);
    for (const auto& t : f.components[1].terms()) {
        int total = 0, var = -1;
        for (int v = 0; v < f.m; ++v) {
            total += t.exps[v];
            if (t.exps[v] >= 1) var = v;
        }
        if (total == 0)
            c0 += t.coeff;
        else if (total == 1)
            w[var] += t.coeff;
        else
            return false;
    }
    for (auto& v : w) v /= k;
    c0 /= k;
    double wn = 0.0;
    for (const auto& v : w) wn += std::norm(v);
    return wn > 0.0;
}

} // namespace detail

// Generic route: stratified low-discrepancy ball quadrature of the
// pullback density against g_r. Accurate while the divisor tube is not
// too thin relative to the sample budget (moderate r).
inline QmcEstimate characteristic_T_qmc(const TestMap& f, double r, const QuadratureBudget& budget,
                                        std::uint64_t seed) {
    f.validate();
    const PullbackDensity q(f);
    return green_ball_integral(q, f.m, r, f.base_point, budget, seed);
}

// Exact route for maps to P^1 with affine-linear components: the density
// depends on z only through zeta = l(z), so Fubini along the fibers gives
//   T(r) = (1/pi) Int_C N_slice(|zeta - l(o)| / ||w||) (1+|zeta|^2)^{-2} dA(zeta)
// with N_slice the g_r slice integral used by the counting function. The
// radial integral is compactified with s = tan(phi).
inline double characteristic_T_linear(const std::vector<Complex>& w, Complex ell_o, int m, double r,
                                      double rel_tol = 1e-8) {
    double wn = 0.0;
    for (const auto& v : w) wn += std::norm(v);
    wn = std::sqrt(wn);
    const auto theta_avg = [&](double s) {
        constexpr int kTheta = 64;
        double acc = 0.0;
        for (int k = 0; k < kTheta; ++k) {
            const double th = 2.0 * kPi * (k + 0.5) / kTheta;
            const Complex zeta(s * std::cos(th), s * std::sin(th));
            const double delta = std::abs(zeta - ell_o) / wn;
            if (delta < r) acc += counting_slice(std::max(delta, 1e-14 * r), r, m, 1e-9);
        }
        return acc / kTheta;
    };
    // s/(1+s^2)^2 ds = sin(phi) cos(phi) dphi under s = tan(phi)
    const auto integrand = [&](double phi) {
        return theta_avg(std::tan(phi)) * std::sin(phi) * std::cos(phi);
    };
    const double I = integrate(integrand, 1e-10, 0.5 * kPi - 1e-10, rel_tol, 0.0, 4000).value;
    return 2.0 * I; // (1/pi) times the 2 pi angular measure
}

// T_f(r, O(1)); scale by deg L for L = O(d). Affine-linear maps to P^1 use
// the exact fiber route; everything else uses the stratified ball
// quadrature.
inline QmcEstimate characteristic_T(const TestMap& f, double r, const QuadratureBudget& budget,
                                    std::uint64_t seed) {
    f.validate();
    std::vector<Complex> w;
    Complex c0;
    if (detail::affine_linear_to_p1(f, w, c0)) {
        Complex ell_o = c0;
        for (int j = 0; j < f.m; ++j) ell_o += w[j] * f.base_point[j];
        QmcEstimate est;
        est.value = characteristic_T_linear(w, ell_o, f.m, r, budget.rel_tol * 1e2 + 1e-9);
        est.std_error = 0.0;
        return est;
    }
    return characteristic_T_qmc(f, r, budget, seed);
}

// Characteristic of the Ricci form: identically zero for the flat models;
// evaluated as the Green-ball integral of the zero curvature density so the
// interface matches the other functionals.
inline QmcEstimate ricci_characteristic(const ConnectedSumModel& model, double r,
                                        const QuadratureBudget& budget, std::uint64_t seed) {
    if (!(r > 0.0)) throw std::domain_error("ricci_characteristic: r must be positive");
    const int m = model.complex_dim();
    QuadratureBudget tiny = budget;
    tiny.ball_points = 256;
    const std::vector<Complex> center(m, Complex(0.0));
    const auto zero_density = [](const std::vector<Complex>&) { return 0.0; };
    return green_ball_integral(zero_density, m, r, center, tiny, seed);
}

// m_f(r, D): spherical average of log 1/||s_D(f)|| over the boundary sphere.
// Samples landing on the divisor (non-finite integrand) are re-jittered
// deterministically; persistent failures raise an error.
inline QmcEstimate proximity_m(const TestMap& f, const DivisorSpec& divisor, double r,
                               const QuadratureBudget& budget, std::uint64_t seed) {
    f.validate();
    divisor.validate(f.target_dim());
    const int n = 2 * f.m;
    std::vector<double> center(n);
    for (int j = 0; j < f.m; ++j) {
        center[2 * j] = f.base_point[j].real();
        center[2 * j + 1] = f.base_point[j].imag();
    }
    std::uint64_t bad = 0;
    const auto integrand = [&](const std::vector<double>& x) {
        std::vector<Complex> z(f.m);
        for (int j = 0; j < f.m; ++j) z[j] = Complex(x[2 * j], x[2 * j + 1]);
        double v = -std::log(section_norm(divisor, f.eval(z)));
        if (!std::isfinite(v)) {
            // deterministic jitter off the divisor
            for (int attempt = 1; attempt <= 3 && !std::isfinite(v); ++attempt) {
                std::vector<Complex> zj = z;
                const double eps = 1e-12 * r * attempt;
                zj[0] += Complex(eps, eps);
                v = -std::log(section_norm(divisor, f.eval(zj)));
            }
            if (!std::isfinite(v))
                throw std::runtime_error("proximity_m: divisor meets the sphere non-transversally");
            ++bad;
        }
        return v;
    };
    return sphere_average(integrand, n, r, center, budget.sphere_points, budget.replicates, seed);
}

// Slice integral of g_r over one affine-linear preimage at distance delta
// from the base point:
//   N_component = pi w_{2m-3} Int_0^{sqrt(r^2-delta^2)} g_r(sqrt(delta^2+s^2)) s^{2m-3} ds.
inline double counting_slice(double delta, double r, int m, double rel_tol = 1e-11) {
    if (delta >= r) return 0.0;
    if (!(delta > 0.0))
        throw std::domain_error("counting_N: base point lies on a divisor preimage");
    const double smax = std::sqrt(r * r - delta * delta);
    const double area = m == 2 ? unit_sphere_area(2) : unit_sphere_area(2 * m - 2);
    const auto integrand = [&](double s) {
        return g_r_euclidean(std::sqrt(delta * delta + s * s), r, m) * std::pow(s, 2 * m - 3);
    };
    return kPi * area * integrate(integrand, 0.0, smax, rel_tol).value;
}

struct CountingResult {
    double n = 0.0;     // N_f(r, D)
    double nbar = 0.0;  // simple counting function; equal for the linear class
};

inline CountingResult counting_N(const TestMap& f, const DivisorSpec& divisor, double r,
                                 double rel_tol = 1e-11) {
    f.validate();
    divisor.validate(f.target_dim());
    CountingResult out;
    for (const auto& comp : divisor.components) {
        switch (comp.preimage_kind) {
        case PreimageKind::Empty:
            break;
        case PreimageKind::Hyperplane: {
            Complex val(0.0);
            for (int j = 0; j < f.m; ++j) val += comp.preimage.normal[j] * f.base_point[j];
            const double delta = std::abs(val - comp.preimage.offset);
            const double slice = counting_slice(delta, r, f.m, rel_tol);
            out.n += slice;    // multiplicity 1
            out.nbar += slice;
            break;
        }
        case PreimageKind::Unsupported:
            throw std::invalid_argument("counting_N: divisor component with unsupported (nonlinear) preimage");
        }
    }
    return out;
}

struct FmtResult {
    double t = 0.0;             // T_f(r, L), L = O(deg D)
    double boundary_term = 0.0; // log 1/||s_D(f(o))||
    double m = 0.0;
    double n = 0.0;
    double residual = 0.0;      // |T + boundary - m - N|
    double std_error = 0.0;     // combined MC error of the estimated terms
};

// First main theorem balance: T_f(r,L) + log 1/||s_D(f(o))|| = m_f(r,D) + N_f(r,D).
inline FmtResult fmt_residual(const TestMap& f, const DivisorSpec& divisor, double r,
                              const QuadratureBudget& budget, std::uint64_t seed) {
    f.validate();
    const auto Fo = f.eval(f.base_point);
    const double so = section_norm(divisor, Fo);
    if (!(so > 0.0)) throw std::invalid_argument("fmt_residual: f(o) lies in the support of D");

    const QmcEstimate t1 = characteristic_T(f, r, budget, seed);
    const QmcEstimate mf = proximity_m(f, divisor, r, budget, seed + 1);
    const CountingResult nf = counting_N(f, divisor, r, budget.rel_tol);

    FmtResult out;
    out.t = divisor.degree() * t1.value;
    out.boundary_term = -std::log(so);
    out.m = mf.value;
    out.n = nf.n;
    out.residual = std::fabs(out.t + out.boundary_term - out.m - out.n);
    out.std_error = std::sqrt(divisor.degree() * divisor.degree() * t1.std_error * t1.std_error +
                              mf.std_error * mf.std_error);
    return out;
}

// Xi(r, delta, kappa): quotient of the V_min tail (dt weight, rate b) by
// (r * V_max tail with dt/t weight, rate a)^{1+delta}.
inline double xi(const ConnectedSumModel& model, double r, double delta) {
    if (!(r > 0.0)) throw std::domain_error("xi: r must be positive");
    if (delta < 0.0) throw std::domain_error("xi: delta must be non-negative");
    const auto& c = model.constants();
    const double num =
        (std::fabs(model.kappa()) + 1.0 / r) * tail_integral_vmin(model, c.b, 0, r);
    const double den = r * tail_integral_vmax(model, c.a, 1, r);
    return num / std::pow(den, 1.0 + delta);
}

// E(r) = V(r) r^{-2} Int_r^inf t dt / V(t).
inline double e_growth(const VolumeProfile& profile, double r) {
    if (!(r > 0.0)) throw std::domain_error("e_growth: r must be positive");
    return profile(r) / (r * r) * volume_tail_moment(profile, r);
}

struct JyReport {
    std::vector<double> r;
    std::vector<double> e;
    double limit_estimate = 0.0; // fitted limit of log^+ E / log r
    double fit_error = 0.0;
};

// Growth condition: lim log^+ E(r) / log r = 0. The limit is estimated from
// the slope of log^+ E against log r over the tail of the grid.
inline JyReport jy_condition(const VolumeProfile& profile, const std::vector<double>& r_grid) {
    JyReport rep;
    std::vector<double> lx, ly;
    for (double r : r_grid) {
        const double e = e_growth(profile, r);
        rep.r.push_back(r);
        rep.e.push_back(e);
    }
    const std::size_t half = r_grid.size() / 2;
    for (std::size_t i = half; i < r_grid.size(); ++i) {
        lx.push_back(std::log(rep.r[i]));
        ly.push_back(log_plus(rep.e[i]));
    }
    const LineFit fit = fit_line(lx, ly);
    rep.limit_estimate = fit.slope;
    rep.fit_error = fit.rms_residual / std::max(1.0, lx.back() - lx.front());
    return rep;
}

// ----- logarithmic derivative lemma --------------------------------------

// Affine-linear meromorphic function psi(z) = <w, z> + c0 on C^m.
struct LinearFunction {
    std::vector<Complex> coeffs;
    Complex constant{0.0};

    int nvars() const { return static_cast<int>(coeffs.size()); }

    Complex eval(const std::vector<Complex>& z) const {
        Complex v = constant;
        for (std::size_t j = 0; j < coeffs.size(); ++j) v += coeffs[j] * z[j];
        return v;
    }

    double coeff_norm() const {
        double s = 0.0;
        for (const auto& c : coeffs) s += std::norm(c);
        return std::sqrt(s);
    }
};

// Total mass of the singular metric Psi on P^1: computed from the radial
// reduction (1/pi) Int du / (1 + u^2) after u = log|zeta|.
inline double psi_total_mass() {
    const auto lorentz = [](double u) { return 1.0 / (1.0 + u * u); };
    const double core = integrate(lorentz, -64.0, 64.0, 1e-13).value;
    const double tail = 2.0 * integrate_to_infinity(lorentz, 64.0, 1e-13, 64.0, 1e-17, 256).value;
    return (core + tail) / kPi;
}

struct LogDerivativeRow {
    double r = 0.0;
    double energy = 0.0;     // (1/4pi) Int g_r ||grad psi||^2 / (|psi|^2 (1+log^2|psi|)) dv
    double t_psi = 0.0;      // T(r, psi) = m + N for the P^1 functionals
    double m_grad = 0.0;     // m(r, ||grad psi|| / |psi|)
    double log_xi = 0.0;     // log^+ Xi(r, delta, kappa)
};

struct LogDerivativeReport {
    std::vector<LogDerivativeRow> rows;
    double energy_offset = 0.0;   // fitted C with energy <= T + C on the calibration half
    double energy_excess = 0.0;   // max over the validation half of energy - T - C
    double lemma_offset = 0.0;    // fitted O(1) of the gradient lemma
    double lemma_excess = 0.0;    // max violation with the fitted offset
    double psi_mass = 0.0;        // should be 1
};

// Verifies, on a radius grid,
//   (energy)  (1/4pi) Int g_r ||grad psi||^2/(|psi|^2(1+log^2|psi|)) dv <= T(r,psi) + O(1)
//   (lemma)   m(r, ||grad psi||/|psi|) <= (2+(1+delta)^2)/2 log^+ T + 1/2 log^+ Xi + O(1)
// with ||grad psi||^2 = 2 sum |d_i psi|^2. The energy integral reduces, for
// affine-linear psi, to the exact fiber decomposition
//   energy = (1/2 pi^2) Int_C N_slice(|psi(o) - zeta| / ||w||) / (|zeta|^2 (1+log^2|zeta|)) dA(zeta),
// evaluated in polar coordinates with the compactifying angle substitution.
inline LogDerivativeReport log_derivative_lemma_check(const LinearFunction& psi,
                                                      const std::vector<Complex>& base_point,
                                                      const ConnectedSumModel& model,
                                                      const std::vector<double>& r_grid, double delta,
                                                      const QuadratureBudget& budget, std::uint64_t seed) {
    const int m = model.complex_dim();
    if (psi.nvars() != m) throw std::invalid_argument("log_derivative_lemma_check: psi arity mismatch");
    const double wn = psi.coeff_norm();
    if (!(wn > 0.0)) throw std::invalid_argument("log_derivative_lemma_check: psi is constant");
    const Complex psi_o = psi.eval(base_point);

    const int ndim = 2 * m;
    std::vector<double> center(ndim);
    for (int j = 0; j < m; ++j) {
        center[2 * j] = base_point[j].real();
        center[2 * j + 1] = base_point[j].imag();
    }

    LogDerivativeReport rep;
    rep.psi_mass = psi_total_mass();

    for (double r : r_grid) {
        LogDerivativeRow row;
        row.r = r;

        // energy by the fiber decomposition; zeta = e^{tan q} e^{i theta}
        const auto theta_avg = [&](double v) {
            const double s = std::exp(v);
            constexpr int kTheta = 64;
            double acc = 0.0;
            for (int k = 0; k < kTheta; ++k) {
                const double th = 2.0 * kPi * (k + 0.5) / kTheta;
                const Complex zeta(s * std::cos(th), s * std::sin(th));
                const double dd = std::abs(psi_o - zeta) / wn;
                if (dd < r) acc += counting_slice(std::max(dd, 1e-14 * r), r, m, 1e-9);
            }
            return acc * (2.0 * kPi / kTheta);
        };
        const auto integrand_q = [&](double q) { return theta_avg(std::tan(q)); };
        const double I = integrate(integrand_q, -0.5 * kPi + 1e-9, 0.5 * kPi - 1e-9, 1e-8, 0.0, 4000).value;
        row.energy = I / (2.0 * kPi * kPi);

        // T(r, psi) = m(r, psi) + N(r, psi); affine-linear psi has no poles
        const auto log_plus_psi = [&](const std::vector<double>& x) {
            std::vector<Complex> z(m);
            for (int j = 0; j < m; ++j) z[j] = Complex(x[2 * j], x[2 * j + 1]);
            return log_plus(std::abs(psi.eval(z)));
        };
        row.t_psi = sphere_average(log_plus_psi, ndim, r, center, budget.sphere_points,
                                   budget.replicates, seed)
                        .value;

        // m(r, ||grad psi|| / |psi|), ||grad psi|| = sqrt(2) ||w||
        const double grad_norm = std::sqrt(2.0) * wn;
        const auto log_plus_grad = [&](const std::vector<double>& x) {
            std::vector<Complex> z(m);
            for (int j = 0; j < m; ++j) z[j] = Complex(x[2 * j], x[2 * j + 1]);
            const double av = std::abs(psi.eval(z));
            return av > 0.0 ? log_plus(grad_norm / av) : 700.0;
        };
        row.m_grad = sphere_average(log_plus_grad, ndim, r, center, budget.sphere_points,
                                    budget.replicates, seed + 7)
                         .value;

        row.log_xi = log_plus(xi(model, r, delta));
        rep.rows.push_back(row);
    }

    // fit the O(1) offsets on the first half, validate on the rest
    const std::size_t half = std::max<std::size_t>(1, rep.rows.size() / 2);
    double c_energy = -std::numeric_limits<double>::infinity();
    double c_lemma = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < half; ++i) {
        const auto& row = rep.rows[i];
        c_energy = std::max(c_energy, row.energy - row.t_psi);
        const double rhs = 0.5 * (2.0 + (1.0 + delta) * (1.0 + delta)) * log_plus(row.t_psi) +
                           0.5 * row.log_xi;
        c_lemma = std::max(c_lemma, row.m_grad - rhs);
    }
    rep.energy_offset = c_energy;
    rep.lemma_offset = c_lemma;
    for (std::size_t i = half; i < rep.rows.size(); ++i) {
        const auto& row = rep.rows[i];
        rep.energy_excess = std::max(rep.energy_excess, row.energy - row.t_psi - c_energy);
        const double rhs = 0.5 * (2.0 + (1.0 + delta) * (1.0 + delta)) * log_plus(row.t_psi) +
                           0.5 * row.log_xi + c_lemma;
        rep.lemma_excess = std::max(rep.lemma_excess, row.m_grad - rhs);
    }
    return rep;
}

// ----- Borel lemma --------------------------------------------------------

struct BorelReport {
    double exceptional_measure = 0.0; // estimated measure of {u' > u^{1+delta}}
    double proof_bound = 0.0;         // 1/(delta u(r1)^delta) + r1 - r0
    double exceptional_lo = 0.0;      // hull of the violating set
    double exceptional_hi = 0.0;
};

// Finite-difference scan of u' <= u^{1+delta} on an increasing sample grid.
inline BorelReport borel_exceptional(const std::vector<double>& r, const std::vector<double>& u,
                                     double delta) {
    if (r.size() != u.size() || r.size() < 3) throw std::invalid_argument("borel_exceptional: need >= 3 samples");
    if (!(delta > 0.0)) throw std::invalid_argument("borel_exceptional: delta must be positive");
    for (std::size_t i = 1; i < r.size(); ++i) {
        if (!(r[i] > r[i - 1])) throw std::invalid_argument("borel_exceptional: radii must increase");
        if (u[i] < u[i - 1] * (1.0 - 1e-12))
            throw std::invalid_argument("borel_exceptional: samples must be non-decreasing");
    }
    BorelReport rep;
    rep.exceptional_lo = std::numeric_limits<double>::infinity();
    rep.exceptional_hi = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i + 1 < r.size(); ++i) {
        const double du = (u[i + 1] - u[i - 1]) / (r[i + 1] - r[i - 1]);
        if (du > std::pow(u[i], 1.0 + delta)) {
            const double cell = 0.5 * (r[i + 1] - r[i - 1]);
            rep.exceptional_measure += cell;
            rep.exceptional_lo = std::min(rep.exceptional_lo, 0.5 * (r[i - 1] + r[i]));
            rep.exceptional_hi = std::max(rep.exceptional_hi, 0.5 * (r[i] + r[i + 1]));
        }
    }
    if (rep.exceptional_measure == 0.0) {
        rep.exceptional_lo = 0.0;
        rep.exceptional_hi = 0.0;
    }
    // proof's bound, anchored at the first positive sample
    std::size_t i1 = 0;
    while (i1 < u.size() && !(u[i1] > 0.0)) ++i1;
    if (i1 < u.size())
        rep.proof_bound = 1.0 / (delta * std::pow(u[i1], delta)) + (r[i1] - r[0]);
    else
        rep.proof_bound = 0.0;
    return rep;
}

// ----- calculus lemma ------------------------------------------------------

// Radial integrand k(rho) about the base point; the registered class is
// radial, which makes both sides exact 1-D quadratures: the boundary
// average is k(r) and the bulk integral is the Green-weighted radial
// integral (summed over sheets for glued models).
struct RadialWeight {
    std::string name;
    std::function<double(double)> k;
};

inline RadialWeight radial_weight(const std::string& name) {
    if (name == "one") return {name, [](double) { return 1.0; }};
    if (name == "grad_coordinate_sq") return {name, [](double) { return 2.0; }};
    if (name == "mild_pole") return {name, [](double s) { return 1.0 / std::max(s, 1e-300); }};
    throw std::invalid_argument("radial_weight: unknown name " + name);
}

struct CalculusRow {
    double r = 0.0;
    double lhs = 0.0;    // Int k d pi_r = k(r)
    double bulk = 0.0;   // Int g_r k dv
    double rhs = 0.0;    // C Xi (bulk)^{(1+delta)^2}
};

struct CalculusReport {
    std::vector<CalculusRow> rows;
    double fitted_c = 0.0;
    std::size_t violations = 0;        // on the validation half
    double violating_measure = 0.0;    // grid measure of the violating set
};

inline double green_bulk_radial(const ConnectedSumModel& model, double r,
                                const std::function<double(double)>& k, double rel_tol = 1e-10) {
    const int m = model.complex_dim();
    const double sheets = model.pure_euclidean() ? 1.0 : static_cast<double>(model.num_ends());
    const double offset = model.pure_euclidean() ? 0.0 : model.central_radius();
    const double area = unit_sphere_area(2 * m);
    const auto integrand = [&](double s) {
        return g_r(model, s, r) * k(s) * sheets * area * std::pow(offset + s, 2 * m - 1);
    };
    return integrate(integrand, 1e-10 * r, r, rel_tol).value;
}

// Int_{boundary} k d pi_r <= C Xi(r, delta, kappa) (Int g_r k dv)^{(1+delta)^2}
// outside a set of finite measure. C is fitted on the first half of the
// grid and validated on the rest; violations and their grid measure are
// data, not errors.
inline CalculusReport calculus_lemma_check(const ConnectedSumModel& model, const RadialWeight& weight,
                                           const std::vector<double>& r_grid, double delta) {
    if (r_grid.size() < 4) throw std::invalid_argument("calculus_lemma_check: grid too small");
    CalculusReport rep;
    const double expo = (1.0 + delta) * (1.0 + delta);
    for (double r : r_grid) {
        CalculusRow row;
        row.r = r;
        row.lhs = weight.k(r);
        row.bulk = green_bulk_radial(model, r, weight.k);
        row.rhs = xi(model, r, delta) * std::pow(row.bulk, expo); // C applied later
        rep.rows.push_back(row);
    }
    const std::size_t half = rep.rows.size() / 2;
    double c = 0.0;
    for (std::size_t i = 0; i < half; ++i) c = std::max(c, rep.rows[i].lhs / rep.rows[i].rhs);
    rep.fitted_c = c;
    for (auto& row : rep.rows) row.rhs *= c;
    for (std::size_t i = half; i < rep.rows.size(); ++i) {
        if (rep.rows[i].lhs > rep.rows[i].rhs * (1.0 + 1e-12)) {
            ++rep.violations;
            const double lo = i > 0 ? 0.5 * (rep.rows[i - 1].r + rep.rows[i].r) : rep.rows[i].r;
            const double hi =
                i + 1 < rep.rows.size() ? 0.5 * (rep.rows[i].r + rep.rows[i + 1].r) : rep.rows[i].r;
            rep.violating_measure += hi - lo;
        }
    }
    return rep;
}

// ----- second main theorem margin and defects ------------------------------

enum class SmtVariant { Xi, RSquared, LogR, Homogeneous };

struct SmtRow {
    double r = 0.0;
    double t_L = 0.0;      // T_f(r, L)
    double t_K = 0.0;      // T_f(r, K_X) = -(n+1)/deg D * T_f(r, L)
    double t_ricci = 0.0;  // 0 for the flat models
    double nbar = 0.0;
    double error_term = 0.0; // variant-dependent
    double margin = 0.0;     // nbar + kappa_fit * error - lhs
};

struct SmtReport {
    std::vector<SmtRow> rows;
    double kappa_fit = 0.0;
    double margin_slope_last_decade = 0.0;
    bool hypothesis_violating = false; // degenerate map: diagnostic run only
};

inline double smt_error_term(SmtVariant variant, const ConnectedSumModel& model, double r, double delta,
                             double t_L, const VolumeProfile* homogeneous_profile) {
    const double log_t = log_plus(t_L);
    switch (variant) {
    case SmtVariant::Xi: return log_t + log_plus(xi(model, r, delta));
    case SmtVariant::RSquared: return log_t + r * r;
    case SmtVariant::LogR: return log_t + std::log(std::max(r, 1.0));
    case SmtVariant::Homogeneous: {
        if (!homogeneous_profile) throw std::invalid_argument("smt_error_term: profile required");
        return log_t + log_plus(e_growth(*homogeneous_profile, r)) + delta * std::log(std::max(r, 1.0));
    }
    }
    throw std::logic_error("unreachable");
}

// Margin evaluator for
//   T_f(r,L) + T_f(r,K_X) + T(r,Ricci) <= Nbar_f(r,D) + O(log^+ T + error term):
// kappa_fit is calibrated on the first half of the grid as the smallest
// coefficient making the margin non-negative there; the report carries the
// margin trend over the last decade. O(.) constants are always reported as
// fitted coefficients, never asserted.
inline SmtReport smt_margin(const TestMap& f, const DivisorSpec& divisor, const ConnectedSumModel& model,
                            const std::vector<double>& r_grid, double delta, SmtVariant variant,
                            const QuadratureBudget& budget, std::uint64_t seed) {
    f.validate();
    divisor.validate(f.target_dim());
    const int n = f.target_dim();
    const int d = divisor.degree();

    // differentiable non-degeneracy for the supported class: a linear map to
    // P^1 is non-degenerate iff its affine part is non-constant
    SmtReport rep;
    {
        bool nondeg = false;
        for (int i = 0; i < f.m && !nondeg; ++i)
            nondeg = !f.components[1].derivative(i).is_zero();
        rep.hypothesis_violating = !nondeg;
    }

    const VolumeProfile* prof = &model.end(0).profile;
    for (double r : r_grid) {
        SmtRow row;
        row.r = r;
        const QmcEstimate t1 = characteristic_T(f, r, budget, seed);
        row.t_L = d * t1.value;
        row.t_K = -(n + 1) * t1.value;
        row.t_ricci = ricci_characteristic(model, r, budget, seed).value;
        row.nbar = counting_N(f, divisor, r, budget.rel_tol).nbar;
        row.error_term = smt_error_term(variant, model, r, delta, row.t_L, prof);
        rep.rows.push_back(row);
    }

    const std::size_t half = std::max<std::size_t>(1, rep.rows.size() / 2);
    double kappa_fit = 0.0;
    for (std::size_t i = 0; i < half; ++i) {
        const auto& row = rep.rows[i];
        const double lhs = row.t_L + row.t_K + row.t_ricci;
        if (row.error_term > 0.0) kappa_fit = std::max(kappa_fit, (lhs - row.nbar) / row.error_term);
    }
    rep.kappa_fit = kappa_fit;
    for (auto& row : rep.rows) {
        const double lhs = row.t_L + row.t_K + row.t_ricci;
        row.margin = row.nbar + kappa_fit * row.error_term - lhs;
    }

    // margin slope over the last decade of the grid
    std::vector<double> lx, ly;
    const double r_max = rep.rows.back().r;
    for (const auto& row : rep.rows)
        if (row.r >= r_max / 10.0) {
            lx.push_back(std::log(row.r));
            ly.push_back(row.margin);
        }
    if (lx.size() >= 2) rep.margin_slope_last_decade = fit_line(lx, ly).slope;
    return rep;
}

struct DefectReport {
    double delta_bar = 0.0;          // 1 - limsup Nbar / T, clamped to [0, 1]
    double comparison_bound = 0.0;   // (n+1)/deg D for X = P^n, L = O(d)
    std::vector<double> window_ratios; // tail-window averages of Nbar/T (doubling windows)
    bool omitted_component = false;  // some component has empty preimage
};

// Simple defect estimate by tail-windowed averages with window doubling:
// limsup Nbar/T is approximated by the maximum of the window means; the
// window sequence is reported alongside.
inline DefectReport defect(const TestMap& f, const DivisorSpec& divisor,
                           const std::vector<double>& r_grid, const QuadratureBudget& budget,
                           std::uint64_t seed) {
    f.validate();
    divisor.validate(f.target_dim());
    DefectReport rep;
    rep.comparison_bound = static_cast<double>(f.target_dim() + 1) / divisor.degree();
    for (const auto& comp : divisor.components)
        if (comp.preimage_kind == PreimageKind::Empty) rep.omitted_component = true;

    std::vector<double> ratio(r_grid.size());
    const int d = divisor.degree();
    for (std::size_t i = 0; i < r_grid.size(); ++i) {
        const double t = d * characteristic_T(f, r_grid[i], budget, seed).value;
        const double nb = counting_N(f, divisor, r_grid[i], budget.rel_tol).nbar;
        if (!(t > 0.0)) throw std::runtime_error("defect: characteristic is not growing (constant map?)");
        ratio[i] = nb / t;
    }

    const double r_max = r_grid.back();
    double best = 0.0;
    for (double window = 2.0; window <= 16.0; window *= 2.0) {
        std::vector<double> vals;
        for (std::size_t i = 0; i < r_grid.size(); ++i)
            if (r_grid[i] >= r_max / window) vals.push_back(ratio[i]);
        if (!vals.empty()) {
            const double avg = mean(vals);
            rep.window_ratios.push_back(avg);
            best = std::max(best, avg);
        }
    }
    rep.delta_bar = std::clamp(1.0 - best, 0.0, 1.0);
    return rep;
}

// ----- Xi asymptotics -------------------------------------------------------

struct XiAsymptoticsReport {
    std::vector<double> r;
    std::vector<double> log_xi;         // log^+ Xi(r, delta, kappa)
    double slope_vs_log_r = 0.0;        // fitted d log Xi / d log r
    double polynomial_envelope = 0.0;   // (2m-1)(1+delta)
    bool within_polynomial = false;
    double r2_coefficient = 0.0;        // max log^+ Xi / r^2
    double homogeneous_excess = 0.0;    // max log^+Xi - log^+E - (4m-2) delta log r
};

// Fits log^+ Xi against the candidate envelopes:
//   log r slope vs the polynomial exponent (2m-1)(1+delta),
//   the r^2 coefficient, and the homogeneous-model bound
//   log^+ E(r) + (4m-2) delta log r + O(1).
inline XiAsymptoticsReport xi_asymptotics(const ConnectedSumModel& model, double delta,
                                          const std::vector<double>& r_grid) {
    XiAsymptoticsReport rep;
    const int m = model.complex_dim();
    std::vector<double> lx, ly;
    for (double r : r_grid) {
        const double v = log_plus(xi(model, r, delta));
        rep.r.push_back(r);
        rep.log_xi.push_back(v);
        lx.push_back(std::log(r));
        ly.push_back(std::log(std::max(xi(model, r, delta), 1e-300)));
        rep.r2_coefficient = std::max(rep.r2_coefficient, v / (r * r));
    }
    rep.slope_vs_log_r = fit_line(lx, ly).slope;
    rep.polynomial_envelope = (2.0 * m - 1.0) * (1.0 + delta);
    rep.within_polynomial = rep.slope_vs_log_r <= rep.polynomial_envelope + 0.05;
    double excess = -std::numeric_limits<double>::infinity();
    const VolumeProfile& prof = model.end(0).profile;
    for (std::size_t i = 0; i < rep.r.size(); ++i) {
        const double e = log_plus(e_growth(prof, rep.r[i]));
        excess = std::max(excess, rep.log_xi[i] - e - (4.0 * m - 2.0) * delta * std::log(rep.r[i]));
    }
    rep.homogeneous_excess = excess;
    return rep;
}

// ----- the universal per-radius record --------------------------------------

struct RGridRow {
    double r = 0.0;
    double t_f = 0.0;
    double m_f = 0.0;
    double n_f = 0.0;
    double nbar_f = 0.0;
    double t_ricci = 0.0;
    double xi_value = 0.0;
    double e_value = 0.0;
    double fmt_residual = 0.0;
    double smt_margin = 0.0;
};

} // namespace nevlab
