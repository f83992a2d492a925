#pragma once

// Radial volume-growth laws V(r). A profile is the single geometric input
// behind every bound formula downstream: tail integrals, exhaustion levels,
// Xi, E(r), and the integral-estimate checks all consume V through this
// interface.
//
// Supported laws:
//   euclidean(m)      V(r) = pi^m r^{2m} / m!            (C^m, real dim 2m)
//   power(c, alpha)   V(r) = c r^alpha
//   spaceform(K<0, n) V(r) = omega_{n-1} Int_0^r (sinh(sqrt(-K) t)/sqrt(-K))^{n-1} dt
//   tabulated         monotone samples, PCHIP interpolation, power-law tails

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "nevlab/numerics.hpp"
#include "nevlab/quadrature.hpp"

namespace nevlab {

enum class ProfileKind { Euclidean, Power, Spaceform, Tabulated };

// Monotone cubic Hermite interpolant (Fritsch-Carlson slopes).
class MonotoneCubic {
public:
    MonotoneCubic() = default;

    MonotoneCubic(std::vector<double> x, std::vector<double> y)
        : x_(std::move(x)), y_(std::move(y)) {
        const std::size_t n = x_.size();
        if (n < 3 || y_.size() != n) throw std::invalid_argument("tabulated profile: need >= 3 samples");
        for (std::size_t i = 1; i < n; ++i)
            if (!(x_[i] > x_[i - 1]) || !(y_[i] > y_[i - 1]))
                throw std::invalid_argument("tabulated profile: samples must be strictly increasing");
        std::vector<double> d(n - 1);
        for (std::size_t i = 0; i + 1 < n; ++i) d[i] = (y_[i + 1] - y_[i]) / (x_[i + 1] - x_[i]);
        m_.resize(n);
        m_[0] = d[0];
        m_[n - 1] = d[n - 2];
        for (std::size_t i = 1; i + 1 < n; ++i) {
            if (d[i - 1] * d[i] <= 0.0)
                m_[i] = 0.0;
            else {
                const double w1 = 2.0 * (x_[i + 1] - x_[i]) + (x_[i] - x_[i - 1]);
                const double w2 = (x_[i + 1] - x_[i]) + 2.0 * (x_[i] - x_[i - 1]);
                m_[i] = (w1 + w2) / (w1 / d[i - 1] + w2 / d[i]);
            }
        }
    }

    double operator()(double x) const {
        const std::size_t n = x_.size();
        if (x <= x_[0]) throw std::domain_error("MonotoneCubic: below range");
        if (x >= x_[n - 1]) throw std::domain_error("MonotoneCubic: above range");
        std::size_t lo = 0, hi = n - 1;
        while (hi - lo > 1) {
            const std::size_t mid = (lo + hi) / 2;
            (x_[mid] <= x ? lo : hi) = mid;
        }
        const double h = x_[lo + 1] - x_[lo];
        const double t = (x - x_[lo]) / h;
        const double t2 = t * t, t3 = t2 * t;
        return (2 * t3 - 3 * t2 + 1) * y_[lo] + (t3 - 2 * t2 + t) * h * m_[lo] +
               (-2 * t3 + 3 * t2) * y_[lo + 1] + (t3 - t2) * h * m_[lo + 1];
    }

    double front_x() const { return x_.front(); }
    double back_x() const { return x_.back(); }
    double front_y() const { return y_.front(); }
    double back_y() const { return y_.back(); }
    const std::vector<double>& xs() const { return x_; }
    const std::vector<double>& ys() const { return y_; }

private:
    std::vector<double> x_, y_, m_;
};

class VolumeProfile {
public:
    static VolumeProfile euclidean(int m) {
        if (m < 1) throw std::invalid_argument("euclidean profile: m >= 1 required");
        VolumeProfile p;
        p.kind_ = ProfileKind::Euclidean;
        p.m_ = m;
        return p;
    }

    static VolumeProfile power(double c, double alpha) {
        if (!(c > 0.0) || !(alpha > 0.0)) throw std::invalid_argument("power profile: c, alpha > 0 required");
        VolumeProfile p;
        p.kind_ = ProfileKind::Power;
        p.c_ = c;
        p.alpha_ = alpha;
        return p;
    }

    static VolumeProfile spaceform(double K, int n) {
        if (!(K < 0.0)) throw std::invalid_argument("spaceform profile: K < 0 required");
        if (n < 2) throw std::invalid_argument("spaceform profile: n >= 2 required");
        VolumeProfile p;
        p.kind_ = ProfileKind::Spaceform;
        p.K_ = K;
        p.n_ = n;
        return p;
    }

    static VolumeProfile tabulated(std::vector<double> r, std::vector<double> v) {
        VolumeProfile p;
        p.kind_ = ProfileKind::Tabulated;
        p.table_ = MonotoneCubic(std::move(r), std::move(v));
        // local power-law exponents at the ends, used for extrapolation
        const auto& xs = p.table_.xs();
        const auto& ys = p.table_.ys();
        const std::size_t n = xs.size();
        p.head_exp_ = std::log(ys[1] / ys[0]) / std::log(xs[1] / xs[0]);
        // tail exponent from a small least-squares over the last quarter
        std::size_t k0 = (3 * n) / 4;
        if (n - k0 < 3) k0 = n - 3;
        std::vector<double> lx, ly;
        for (std::size_t i = k0; i < n; ++i) {
            lx.push_back(std::log(xs[i]));
            ly.push_back(std::log(ys[i]));
        }
        p.tail_exp_ = fit_line(lx, ly).slope;
        return p;
    }

    ProfileKind kind() const { return kind_; }
    int complex_dim() const { return m_; }
    double power_exponent() const { return alpha_; }
    double tail_exponent() const;

    // V(r); exact closed form for euclidean/power, quadrature for spaceform,
    // interpolation plus power-law extrapolation for tabulated.
    double operator()(double r) const {
        if (r < 0.0) throw std::domain_error("volume: negative radius");
        if (r == 0.0) return 0.0;
        switch (kind_) {
        case ProfileKind::Euclidean:
            return std::pow(kPi, m_) * std::pow(r, 2 * m_) / std::tgamma(m_ + 1.0);
        case ProfileKind::Power:
            return c_ * std::pow(r, alpha_);
        case ProfileKind::Spaceform: {
            const double sK = std::sqrt(-K_);
            const auto integrand = [&](double t) { return std::pow(std::sinh(sK * t) / sK, n_ - 1); };
            return unit_sphere_area(n_) * integrate(integrand, 0.0, r, 1e-13).value;
        }
        case ProfileKind::Tabulated: {
            if (r <= table_.front_x())
                return table_.front_y() * std::pow(r / table_.front_x(), head_exp_);
            if (r >= table_.back_x())
                return table_.back_y() * std::pow(r / table_.back_x(), tail_exp_);
            return table_(r);
        }
        }
        throw std::logic_error("unreachable");
    }

    std::string describe() const {
        switch (kind_) {
        case ProfileKind::Euclidean: return "euclidean(m=" + std::to_string(m_) + ")";
        case ProfileKind::Power:
            return "power(c=" + std::to_string(c_) + ",alpha=" + std::to_string(alpha_) + ")";
        case ProfileKind::Spaceform:
            return "spaceform(K=" + std::to_string(K_) + ",n=" + std::to_string(n_) + ")";
        case ProfileKind::Tabulated: return "tabulated(" + std::to_string(table_.xs().size()) + " samples)";
        }
        return "?";
    }

private:
    ProfileKind kind_ = ProfileKind::Euclidean;
    int m_ = 2;           // euclidean complex dimension
    double c_ = 1.0;      // power coefficient
    double alpha_ = 4.0;  // power exponent
    double K_ = -1.0;     // spaceform curvature
    int n_ = 4;           // spaceform real dimension
    MonotoneCubic table_;
    double head_exp_ = 2.0, tail_exp_ = 2.0;
};

// Growth exponent of V at infinity, as used by the parabolicity decision.
inline double VolumeProfile::tail_exponent() const {
    switch (kind_) {
    case ProfileKind::Euclidean: return 2.0 * m_;
    case ProfileKind::Power: return alpha_;
    case ProfileKind::Spaceform: return std::numeric_limits<double>::infinity();
    case ProfileKind::Tabulated: return tail_exp_;
    }
    return 0.0;
}

// Int_1^inf dt / V(sqrt t) converges iff the growth exponent of V exceeds 2.
// Exact laws are decided analytically. Tabulated profiles are decided from
// the fitted tail exponent and refused inside a 0.05-wide band around the
// critical value, so a noisy table never produces a silent wrong answer.
inline bool non_parabolic(const VolumeProfile& profile) {
    constexpr double kCritical = 2.0;
    constexpr double kRefuseBand = 0.05;
    switch (profile.kind()) {
    case ProfileKind::Euclidean: return profile.complex_dim() >= 2;
    case ProfileKind::Power: return profile.power_exponent() > kCritical;
    case ProfileKind::Spaceform: return true;
    case ProfileKind::Tabulated: {
        const double e = profile.tail_exponent();
        if (std::fabs(e - kCritical) < kRefuseBand)
            throw std::runtime_error(
                "non_parabolic: undecidable, tabulated tail exponent " + std::to_string(e) +
                " is within 0.05 of the critical value 2");
        return e > kCritical;
    }
    }
    throw std::logic_error("unreachable");
}

// Geodesic-ball volume in the n-dimensional space form of constant
// sectional curvature K.
inline double spaceform_ball_volume(double K, int n, double r) {
    if (r < 0.0) throw std::domain_error("spaceform_ball_volume: negative radius");
    if (r == 0.0) return 0.0;
    if (K == 0.0) return unit_ball_volume(n) * std::pow(r, n);
    const double s = std::sqrt(std::fabs(K));
    const auto integrand = [&](double t) {
        const double sn = K < 0.0 ? std::sinh(s * t) / s : std::sin(s * t) / s;
        return std::pow(sn, n - 1);
    };
    if (K > 0.0 && r > kPi / s) throw std::domain_error("spaceform_ball_volume: r beyond diameter");
    return unit_sphere_area(n) * integrate(integrand, 0.0, r, 1e-13).value;
}

struct VolumeComparisonReport {
    std::vector<double> r;
    std::vector<double> ratio;          // V(r) / V(K, r)
    bool ratio_nonincreasing = true;
    bool volume_dominated = true;       // V(r) <= V(K, r) everywhere
    std::vector<double> violations_r;   // grid points violating either claim
};

// Bishop-Gromov check: under Ric >= (n-1)K the ratio V(r)/V(K,r) must be
// non-increasing and V(r) <= V(K,r). Violations are reported, not thrown:
// a profile that fails the curvature hypothesis is expected to show them.
inline VolumeComparisonReport volume_comparison_check(const VolumeProfile& profile, double K, int n,
                                                      const std::vector<double>& r_grid) {
    constexpr double kRelTol = 1e-9, kAbsTol = 1e-12;
    VolumeComparisonReport rep;
    rep.r = r_grid;
    for (double r : r_grid) {
        if (!(r > 0.0)) throw std::invalid_argument("volume_comparison_check: grid radii must be positive");
        rep.ratio.push_back(profile(r) / spaceform_ball_volume(K, n, r));
    }
    for (std::size_t i = 0; i < rep.r.size(); ++i) {
        if (i > 0 && rep.ratio[i] > rep.ratio[i - 1] * (1.0 + kRelTol) + kAbsTol) {
            rep.ratio_nonincreasing = false;
            rep.violations_r.push_back(rep.r[i]);
        }
        if (rep.ratio[i] > 1.0 + kRelTol) {
            rep.volume_dominated = false;
            if (rep.violations_r.empty() || rep.violations_r.back() != rep.r[i])
                rep.violations_r.push_back(rep.r[i]);
        }
    }
    return rep;
}

} // namespace nevlab
