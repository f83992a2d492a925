#pragma once

// Tail integrals of the form
//
//   Int_0^infty exp(-r^2 / (c t)) / (V(sqrt t) t^p) dt,   p in {0, 1},
//
// and everything built from them: Euclidean heat kernel and Green closed
// forms, the two-sided and three-term kernel bound evaluators, constant
// fitting, and the two integral-estimate verifiers for non-negative Ricci
// profiles.
//
// The substitution t = r^2 e^u centers the unimodal integrand at u ~ 0 and
// gives exponential decay on both sides for non-parabolic profiles, so one
// adaptive pass on a truncated u-window is uniformly accurate for r spanning
// several decades. The window is truncated where the integrand falls below
// 1e-16 of its peak; near-critical volume growth just makes the window long,
// which the log substitution absorbs.

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

#include "nevlab/geometry.hpp"
#include "nevlab/numerics.hpp"
#include "nevlab/quadrature.hpp"
#include "nevlab/volume_profile.hpp"

namespace nevlab {

struct TailIntegralSpec {
    VolumeProfile profile;
    double rate = 4.0; // the a or b of the bound it feeds
    int power = 0;     // 0: dt weight, 1: dt/t weight
    double r = 1.0;

    void validate() const {
        if (!(rate > 0.0)) throw std::invalid_argument("tail integral: rate constant must be positive");
        if (power != 0 && power != 1) throw std::invalid_argument("tail integral: power must be 0 or 1");
        if (!(r > 0.0)) throw std::invalid_argument("tail integral: r must be positive");
    }
};

struct TailIntegralResult {
    double value = 0.0;
    double error = 0.0;
};

namespace detail {

template <class Volume>
TailIntegralResult tail_core(const Volume& volume, double rate, int power, double r, double rel_tol) {
    const double r2 = r * r;
    const auto f = [&](double u) {
        const double t = r2 * std::exp(u);
        const double damp = std::exp(-std::exp(-u) / rate);
        const double v = volume(r * std::exp(0.5 * u));
        return power == 0 ? damp * t / v : damp / v;
    };

    double peak = 0.0, u_peak = 0.0;
    for (double u = -20.0; u <= 60.0; u += 0.5) {
        const double fu = f(u);
        if (fu > peak) {
            peak = fu;
            u_peak = u;
        }
    }
    if (peak == 0.0) return {};
    const double cut = peak * 1e-16;
    const double u_cap = 690.0 - 2.0 * std::log(r) - 1.0; // keep t representable
    double lo = u_peak, hi = u_peak, step = 1.0;
    while (f(lo) > cut && lo > -200.0) {
        lo -= step;
        step *= 1.5;
    }
    step = 1.0;
    while (f(hi) > cut && hi < u_cap) {
        hi += step;
        step *= 1.5;
    }
    const QuadResult q = integrate(f, lo, hi, rel_tol, 0.0, 20000);
    return {q.value, q.error};
}

} // namespace detail

inline TailIntegralResult tail_integral_with_error(const TailIntegralSpec& spec, double rel_tol = 1e-12) {
    spec.validate();
    if (spec.power == 0 && !non_parabolic(spec.profile))
        throw std::domain_error("tail integral: divergent (dt weight over a parabolic profile)");
    return detail::tail_core(spec.profile, spec.rate, spec.power, spec.r, rel_tol);
}

inline double tail_integral(const TailIntegralSpec& spec, double rel_tol = 1e-12) {
    return tail_integral_with_error(spec, rel_tol).value;
}

inline double tail_integral(const VolumeProfile& profile, double rate, int power, double r,
                            double rel_tol = 1e-12) {
    return tail_integral(TailIntegralSpec{profile, rate, power, r}, rel_tol);
}

// Model-level tails against the pointwise min/max end volumes.
inline double tail_integral_vmax(const ConnectedSumModel& model, double rate, int power, double r,
                                 double rel_tol = 1e-12) {
    return detail::tail_core([&](double s) { return model.v_max(s); }, rate, power, r, rel_tol).value;
}

inline double tail_integral_vmin(const ConnectedSumModel& model, double rate, int power, double r,
                                 double rel_tol = 1e-12) {
    return detail::tail_core([&](double s) { return model.v_min(s); }, rate, power, r, rel_tol).value;
}

// Int_r^inf t dt / V(t), via t = r e^u. The integrand decays like
// e^{(2-alpha)u}, so near-critical growth needs a long but cheap window.
inline double volume_tail_moment(const VolumeProfile& profile, double r, double rel_tol = 1e-12) {
    if (!(r > 0.0)) throw std::domain_error("volume_tail_moment: r must be positive");
    if (!non_parabolic(profile)) throw std::domain_error("volume_tail_moment: divergent tail (parabolic profile)");
    const auto f = [&](double u) {
        const double t = r * std::exp(u);
        return t * t / profile(t);
    };
    const double f0 = f(0.0);
    double hi = 1.0, step = 1.0;
    const double cut = f0 * 1e-18;
    const double u_cap = 690.0 - std::log(r) - 1.0;
    while (f(hi) > cut && hi < u_cap) {
        hi += step;
        step *= 1.25;
    }
    return integrate(f, 0.0, hi, rel_tol, 0.0, 20000).value;
}

// p(t, 0, z) = (4 pi t)^{-m} exp(-rho^2 / 4t) on C^m.
inline double euclidean_heat_kernel(double t, double rho_dist, int m) {
    if (!(t > 0.0)) throw std::domain_error("euclidean_heat_kernel: t must be positive");
    return std::pow(4.0 * kPi * t, -m) * std::exp(-rho_dist * rho_dist / (4.0 * t));
}

// G(0, z) = rho^{2-2m} / ((m-1) omega_{2m-1}) on C^m, m >= 2.
inline double green_euclidean(double rho_dist, int m) {
    if (m < 2) throw std::invalid_argument("green_euclidean: m >= 2 required");
    if (!(rho_dist > 0.0)) throw std::domain_error("green_euclidean: pole at rho = 0");
    return std::pow(rho_dist, 2 - 2 * m) / ((m - 1) * unit_sphere_area(2 * m));
}

struct BoundPair {
    double lower = 0.0;
    double upper = 0.0;
};

// 2A Int e^{-rho^2/at}/V_max <= G(o, x) <= 2B Int e^{-rho^2/bt}/V_min.
inline BoundPair green_bounds(const ConnectedSumModel& model, double rho_dist) {
    if (!(rho_dist > 0.0)) throw std::domain_error("green_bounds: rho must be positive");
    const auto& c = model.constants();
    BoundPair out;
    out.lower = 2.0 * c.A * tail_integral_vmax(model, c.a, 0, rho_dist);
    out.upper = 2.0 * c.B * tail_integral_vmin(model, c.b, 0, rho_dist);
    if (out.lower > out.upper * (1.0 + 1e-9))
        throw std::logic_error("green_bounds: lower exceeds upper (inadmissible constants)");
    return out;
}

// A/V_max(sqrt t) e^{-rho^2/at} <= p(t, o, x) <= B/V_min(sqrt t) e^{-rho^2/bt}.
inline BoundPair hk_two_sided(const ConnectedSumModel& model, double t, double rho_dist) {
    if (!(t > 0.0)) throw std::domain_error("hk_two_sided: t must be positive");
    const auto& c = model.constants();
    const double st = std::sqrt(t);
    const double r2 = rho_dist * rho_dist;
    BoundPair out;
    out.lower = c.A / model.v_max(st) * std::exp(-r2 / (c.a * t));
    out.upper = c.B / model.v_min(st) * std::exp(-r2 / (c.b * t));
    return out;
}

// Full three-term bounds between arbitrary points of the glued model:
//
//   C (H(x,t)H(y,t)/V_0 + H(x,t)/V_{i_y} + H(y,t)/V_{i_x}) e^{-d_+^2/ct}
//     + C / sqrt(V_{i_x} V_{i_y}) e^{-d_0^2/ct}
//
// with (C1, c1) for the lower and (C2, c2) for the upper envelope. End-local
// ball volumes centered at a point are taken as the end profile at the same
// scale (exact for the flat ends of this model away from the seam).
inline BoundPair hk_full_bounds(const ConnectedSumModel& model, double t, const SheetPoint& x,
                                const SheetPoint& y) {
    if (!(t > 0.0)) throw std::domain_error("hk_full_bounds: t must be positive");
    const auto& c = model.constants();
    if (!(c.C1 > 0.0 && c.c1 > 0.0 && c.C2 > 0.0 && c.c2 > 0.0))
        throw std::invalid_argument("hk_full_bounds: full-bound constants (C1,c1,C2,c2) not set");
    const double st = std::sqrt(t);
    const double hx = h_function(model, x, t);
    const double hy = h_function(model, y, t);
    const double v0 = model.v_min(st);
    const double vx = model.end(x.sheet).profile(st);
    const double vy = model.end(y.sheet).profile(st);
    const DistanceResult d = distances(model, x, y);

    const auto eval = [&](double C, double cc) {
        const double through =
            (hx * hy / v0 + hx / vy + hy / vx) * std::exp(-d.d_plus * d.d_plus / (cc * t));
        double direct = 0.0;
        if (std::isfinite(d.d_empty))
            direct = std::exp(-d.d_empty * d.d_empty / (cc * t)) / std::sqrt(vx * vy);
        return C * (through + direct);
    };
    return {eval(c.C1, c.c1), eval(c.C2, c.c2)};
}

// One empirical kernel value with an uncertainty band. Exact samples carry
// p_lo == p_hi.
struct KernelSample {
    double t = 0.0;
    double rho = 0.0;
    double p_lo = 0.0;
    double p_hi = 0.0;
};

struct BoundFit {
    HeatBoundConstants constants;
    double max_log_slack = 0.0;
    double mean_log_slack = 0.0;
};

// Deterministic grid-plus-refine search for admissible (A, B, a, b). For
// fixed rates the extremal admissible amplitudes are closed-form:
//   A(a) = min_i p_lo,i V_max(sqrt t_i) e^{rho_i^2 / (a t_i)}
//   B(b) = max_i p_hi,i V_min(sqrt t_i) e^{rho_i^2 / (b t_i)}
// Samples with inverted or non-positive bands are contradictory and
// rejected. The fit minimizes the mean log-slack of the sandwich.
inline BoundFit fit_bound_constants(const ConnectedSumModel& model, const std::vector<KernelSample>& samples) {
    if (samples.empty()) throw std::invalid_argument("fit_bound_constants: no samples");
    for (const auto& s : samples) {
        if (!(s.t > 0.0) || s.rho < 0.0) throw std::invalid_argument("fit_bound_constants: bad sample domain");
        if (!(s.p_hi > 0.0) || s.p_lo > s.p_hi)
            throw std::invalid_argument(
                "fit_bound_constants: contradictory sample (lower band above upper, or non-positive)");
    }

    struct Cached {
        double t, rho2, p_lo, p_hi, vmin, vmax;
    };
    std::vector<Cached> cache;
    cache.reserve(samples.size());
    for (const auto& s : samples) {
        const double st = std::sqrt(s.t);
        cache.push_back({s.t, s.rho * s.rho, s.p_lo, s.p_hi, model.v_min(st), model.v_max(st)});
    }

    const auto amplitude_lower = [&](double a) {
        double A = std::numeric_limits<double>::infinity();
        for (const auto& s : cache)
            A = std::min(A, s.p_lo * s.vmax * std::exp(std::min(700.0, s.rho2 / (a * s.t))));
        return A;
    };
    const auto amplitude_upper = [&](double b) {
        double B = 0.0;
        for (const auto& s : cache) B = std::max(B, s.p_hi * s.vmin * std::exp(s.rho2 / (b * s.t)));
        return B;
    };
    const auto slack = [&](double a, double b, double A, double B, double& max_out) {
        double sum = 0.0, worst = 0.0;
        for (const auto& s : cache) {
            const double lo = A / s.vmax * std::exp(-s.rho2 / (a * s.t));
            const double up = B / s.vmin * std::exp(-s.rho2 / (b * s.t));
            const double gap = std::log(up) - std::log(std::max(lo, 1e-300));
            sum += gap;
            worst = std::max(worst, gap);
        }
        max_out = worst;
        return sum / static_cast<double>(cache.size());
    };

    double best_a = 4.0, best_b = 4.0, best_obj = std::numeric_limits<double>::infinity();
    double lo_a = 0.5, hi_a = 64.0, lo_b = 0.5, hi_b = 64.0;
    for (int pass = 0; pass < 3; ++pass) {
        constexpr int kGrid = 25;
        for (int i = 0; i < kGrid; ++i) {
            const double a = lo_a * std::pow(hi_a / lo_a, i / double(kGrid - 1));
            const double A = amplitude_lower(a);
            if (!(A > 0.0)) continue;
            for (int j = 0; j < kGrid; ++j) {
                const double b = lo_b * std::pow(hi_b / lo_b, j / double(kGrid - 1));
                if (b < a) continue; // keep the lower envelope decaying at least as fast
                const double B = amplitude_upper(b);
                double worst = 0.0;
                const double obj = slack(a, b, A, B, worst);
                if (obj < best_obj) {
                    best_obj = obj;
                    best_a = a;
                    best_b = b;
                }
            }
        }
        const double fa = std::pow(hi_a / lo_a, 1.0 / (kGrid - 1));
        const double fb = std::pow(hi_b / lo_b, 1.0 / (kGrid - 1));
        lo_a = best_a / fa;
        hi_a = best_a * fa;
        lo_b = best_b / fb;
        hi_b = best_b * fb;
    }

    BoundFit out;
    out.constants = model.constants();
    out.constants.a = best_a;
    out.constants.b = best_b;
    out.constants.A = amplitude_lower(best_a);
    out.constants.B = amplitude_upper(best_b);
    if (!(out.constants.A > 0.0) || !std::isfinite(out.constants.A))
        throw std::runtime_error("fit_bound_constants: infeasible sample set (vanishing lower amplitude)");
    if (out.constants.A > out.constants.B) out.constants.A = out.constants.B;
    out.mean_log_slack = slack(best_a, best_b, out.constants.A, out.constants.B, out.max_log_slack);
    return out;
}

// Empirical kernel value between the base point and an arbitrary point of
// the glued model, for fitting the three-term bound constants.
struct FullBoundSample {
    double t = 0.0;
    SheetPoint y;
    double p_lo = 0.0;
    double p_hi = 0.0;
};

// Fit (C1, c1, C2, c2) of the three-term bounds against sampled kernel
// bands, same contract as fit_bound_constants: extremal amplitudes are
// closed-form per rate, rates found by a refined grid search on the mean
// log-slack.
inline HeatBoundConstants fit_full_bound_constants(const ConnectedSumModel& model,
                                                   const std::vector<FullBoundSample>& samples) {
    if (samples.empty()) throw std::invalid_argument("fit_full_bound_constants: no samples");
    const SheetPoint o = [&] {
        SheetPoint p;
        p.sheet = 0;
        p.coords.assign(model.real_dim(), 0.0);
        p.coords[0] = model.central_radius();
        return p;
    }();

    struct Cached {
        double t, w_term, direct_vol, d_plus2, d_empty2, p_lo, p_hi;
    };
    std::vector<Cached> cache;
    for (const auto& s : samples) {
        if (!(s.t > 0.0) || !(s.p_hi > 0.0) || s.p_lo > s.p_hi)
            throw std::invalid_argument("fit_full_bound_constants: contradictory sample");
        const double st = std::sqrt(s.t);
        const double hx = h_function(model, o, s.t);
        const double hy = h_function(model, s.y, s.t);
        const double vx = model.end(o.sheet).profile(st);
        const double vy = model.end(s.y.sheet).profile(st);
        const DistanceResult d = distances(model, o, s.y);
        Cached c;
        c.t = s.t;
        c.w_term = hx * hy / model.v_min(st) + hx / vy + hy / vx;
        c.direct_vol = 1.0 / std::sqrt(vx * vy);
        c.d_plus2 = d.d_plus * d.d_plus;
        c.d_empty2 = std::isfinite(d.d_empty) ? d.d_empty * d.d_empty
                                              : std::numeric_limits<double>::infinity();
        c.p_lo = s.p_lo;
        c.p_hi = s.p_hi;
        cache.push_back(c);
    }

    const auto shape = [&](const Cached& s, double rate) {
        double v = s.w_term * std::exp(-s.d_plus2 / (rate * s.t));
        if (std::isfinite(s.d_empty2)) v += s.direct_vol * std::exp(-s.d_empty2 / (rate * s.t));
        return v;
    };
    const auto amp_lower = [&](double rate) {
        double C = std::numeric_limits<double>::infinity();
        for (const auto& s : cache) C = std::min(C, s.p_lo / shape(s, rate));
        return C;
    };
    const auto amp_upper = [&](double rate) {
        double C = 0.0;
        for (const auto& s : cache) C = std::max(C, s.p_hi / shape(s, rate));
        return C;
    };

    double best_c1 = 4.0, best_c2 = 4.0, best_obj = std::numeric_limits<double>::infinity();
    double lo1 = 0.5, hi1 = 64.0, lo2 = 0.5, hi2 = 64.0;
    for (int pass = 0; pass < 3; ++pass) {
        constexpr int kGrid = 21;
        for (int i = 0; i < kGrid; ++i) {
            const double c1 = lo1 * std::pow(hi1 / lo1, i / double(kGrid - 1));
            const double C1 = amp_lower(c1);
            if (!(C1 > 0.0)) continue;
            for (int j = 0; j < kGrid; ++j) {
                const double c2 = lo2 * std::pow(hi2 / lo2, j / double(kGrid - 1));
                if (c2 < c1) continue;
                const double C2 = amp_upper(c2);
                double obj = 0.0;
                for (const auto& s : cache)
                    obj += std::log(C2 * shape(s, c2)) - std::log(std::max(C1 * shape(s, c1), 1e-300));
                obj /= static_cast<double>(cache.size());
                if (obj < best_obj) {
                    best_obj = obj;
                    best_c1 = c1;
                    best_c2 = c2;
                }
            }
        }
        const double f1 = std::pow(hi1 / lo1, 1.0 / (kGrid - 1));
        const double f2 = std::pow(hi2 / lo2, 1.0 / (kGrid - 1));
        lo1 = best_c1 / f1;
        hi1 = best_c1 * f1;
        lo2 = best_c2 / f2;
        hi2 = best_c2 * f2;
    }

    HeatBoundConstants out = model.constants();
    out.c1 = best_c1;
    out.c2 = best_c2;
    out.C1 = amp_lower(best_c1);
    out.C2 = amp_upper(best_c2);
    if (!(out.C1 > 0.0) || !std::isfinite(out.C1))
        throw std::runtime_error("fit_full_bound_constants: infeasible sample set");
    return out;
}

// Per-radius slack record for the integral-estimate checks. Slack ratios
// are always reported, never booleans alone.
struct SlackReport {
    std::vector<double> r;
    std::vector<double> lhs;
    std::vector<double> rhs;
    std::vector<double> slack; // oriented so that slack >= 1 means the estimate holds
    double min_slack = std::numeric_limits<double>::infinity();
    std::size_t violations = 0;
    double constant = 0.0; // the c_mu or C_mu used

    void push(double rr, double l, double h, double s) {
        r.push_back(rr);
        lhs.push_back(l);
        rhs.push_back(h);
        slack.push_back(s);
        min_slack = std::min(min_slack, s);
        if (s < 1.0) ++violations;
    }
};

namespace detail {

// Comparison dimension for the Bishop-Gromov step: the smallest m with
// 2m >= growth exponent.
inline int comparison_dim(const VolumeProfile& profile) {
    if (profile.kind() == ProfileKind::Euclidean) return profile.complex_dim();
    const double e = profile.tail_exponent();
    if (!std::isfinite(e)) throw std::invalid_argument("integral estimates: profile grows super-polynomially");
    return std::max(2, static_cast<int>(std::ceil(0.5 * e)));
}

} // namespace detail

// Int_0^inf e^{-r^2/mu t} / V(sqrt t) dt/t >= c_mu / V(r) with the explicit
// constant c_mu = m^{-1} e^{-1/mu}; slack = LHS V(r) / c_mu.
inline SlackReport est1_check(const VolumeProfile& profile, double mu, const std::vector<double>& r_grid) {
    if (!(mu > 0.0)) throw std::invalid_argument("est1_check: mu must be positive");
    const int m = detail::comparison_dim(profile);
    if (profile.tail_exponent() > 2.0 * m + 1e-9)
        throw std::invalid_argument("est1_check: profile grows faster than the comparison dimension allows");
    SlackReport rep;
    rep.constant = std::exp(-1.0 / mu) / m;
    for (double r : r_grid) {
        const double lhs = tail_integral(profile, mu, 1, r);
        const double rhs = rep.constant / profile(r);
        rep.push(r, lhs, rhs, lhs / rhs);
    }
    return rep;
}

// Int_0^inf e^{-r^2/mu t} / V(sqrt t) dt <= C_mu r^2 / V(r) + 2 Int_r^inf t dt / V(t)
// for r > 1. C_mu is not assumed: it is certified as the grid maximum of
//   r^{2-4m} Int_{r^2}^inf s^{2m-2} e^{-s/(mu r^2)} ds
// over r in [1, 1e3] (constant in r for exact laws; the search keeps the
// procedure honest either way).
inline double est2_constant(double mu, int m) {
    double c = 0.0;
    for (int i = 0; i <= 60; ++i) {
        const double r = std::pow(10.0, 3.0 * i / 60.0);
        const double r2 = r * r;
        const auto integrand = [&](double s) { return std::pow(s, 2 * m - 2) * std::exp(-s / (mu * r2)); };
        const double integral = integrate_to_infinity(integrand, r2, 1e-12, mu * r2).value;
        c = std::max(c, integral / std::pow(r, 4 * m - 2));
    }
    return c;
}

inline SlackReport est2_check(const VolumeProfile& profile, double mu, const std::vector<double>& r_grid) {
    if (!(mu > 0.0)) throw std::invalid_argument("est2_check: mu must be positive");
    const int m = detail::comparison_dim(profile);
    SlackReport rep;
    rep.constant = est2_constant(mu, m);
    for (double r : r_grid) {
        if (!(r > 1.0)) throw std::invalid_argument("est2_check: requires r > 1");
        const double lhs = tail_integral(profile, mu, 0, r);
        const double rhs = rep.constant * r * r / profile(r) + 2.0 * volume_tail_moment(profile, r);
        rep.push(r, lhs, rhs, rhs / lhs);
    }
    return rep;
}

} // namespace nevlab
