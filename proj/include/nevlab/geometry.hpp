#pragma once

// The model connected-sum geometry: theta copies of R^{2m} minus the open
// ball of radius R (the central part K degenerates to the gluing sphere
// itself), glued along ||x|| = R. This canonical choice admits exact
// distance formulas and a symmetric Monte Carlo discretization.
//
// Distance conventions on one sheet (planar convex-obstacle geodesics):
//   d_empty(x,y)  shortest path avoiding the open seam ball; the straight
//                 segment when it misses the ball, otherwise the exact
//                 tangent-arc-tangent path in the 2-plane spanned by x, y.
//   d_plus(x,y)   shortest path touching the seam sphere, minimized over
//                 the seam point; legs use the same obstacle-aware length.
//   d = min(d_empty, d_plus); d_empty = infinity across different sheets.
//
// |x| (sup of distances to the central part) is taken extrinsically as
// ||x|| + R: chord distances to the seam sphere peak at the antipode at
// ||x|| + R, matching diam(K) = 2R so that the two-sided sanity bounds
// |x|+|y|-2 diam(K) <= d_plus <= |x|+|y| hold exactly on this model.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

#include "nevlab/numerics.hpp"
#include "nevlab/quadrature.hpp"
#include "nevlab/volume_profile.hpp"

namespace nevlab {

struct EndSpec {
    VolumeProfile profile;
    double ricci_lower = 0.0; // kappa_j
};

// Heat-kernel bound constants. (A, B, a, b) drive the reduced two-sided
// bounds from the base point; (C1, c1, C2, c2) drive the full three-term
// bounds between arbitrary points.
struct HeatBoundConstants {
    double A = 0.0, B = 0.0, a = 0.0, b = 0.0;
    double C1 = 0.0, c1 = 0.0, C2 = 0.0, c2 = 0.0;

    void validate() const {
        if (!(A > 0.0 && B > 0.0 && a > 0.0 && b > 0.0))
            throw std::invalid_argument("HeatBoundConstants: A, B, a, b must be positive");
        if (A > B) throw std::invalid_argument("HeatBoundConstants: A <= B required");
    }
};

class ConnectedSumModel {
public:
    ConnectedSumModel(std::vector<EndSpec> ends, int complex_dim, HeatBoundConstants constants,
                      double central_radius = 1.0)
        : ends_(std::move(ends)), m_(complex_dim), constants_(constants), radius_(central_radius) {
        if (ends_.empty()) throw std::invalid_argument("ConnectedSumModel: at least one end required");
        if (m_ < 2) throw std::invalid_argument("ConnectedSumModel: complex dimension >= 2 required");
        if (!(radius_ > 0.0)) throw std::invalid_argument("ConnectedSumModel: central radius must be positive");
        constants_.validate();
        for (const auto& e : ends_)
            if (!non_parabolic(e.profile))
                throw std::invalid_argument("ConnectedSumModel: every end must be non-parabolic: " +
                                            e.profile.describe());
    }

    // C^m itself with the exact kernel constants A = B = 1/(4^m m!), a = b = 4.
    static ConnectedSumModel euclidean_space(int m) {
        const double A = 1.0 / (std::pow(4.0, m) * std::tgamma(m + 1.0));
        HeatBoundConstants c;
        c.A = c.B = A;
        c.a = c.b = 4.0;
        c.C1 = c.c1 = c.C2 = c.c2 = 0.0;
        ConnectedSumModel model({EndSpec{VolumeProfile::euclidean(m), 0.0}}, m, c);
        model.pure_euclidean_ = true;
        return model;
    }

    std::size_t num_ends() const { return ends_.size(); }
    const EndSpec& end(std::size_t j) const { return ends_.at(j); }
    int complex_dim() const { return m_; }
    int real_dim() const { return 2 * m_; }
    double central_radius() const { return radius_; }
    const HeatBoundConstants& constants() const { return constants_; }
    HeatBoundConstants& constants() { return constants_; }

    // A single-end euclidean model declared via euclidean_space(): the seam
    // collapses and the geometry is globally flat with o at the origin.
    bool pure_euclidean() const { return pure_euclidean_; }

    double kappa() const {
        double k = ends_.front().ricci_lower;
        for (const auto& e : ends_) k = std::min(k, e.ricci_lower);
        return k;
    }

    double v_min(double r) const {
        double v = ends_.front().profile(r);
        for (std::size_t j = 1; j < ends_.size(); ++j) v = std::min(v, ends_[j].profile(r));
        return v;
    }

    double v_max(double r) const {
        double v = ends_.front().profile(r);
        for (std::size_t j = 1; j < ends_.size(); ++j) v = std::max(v, ends_[j].profile(r));
        return v;
    }

    // |o| for the reference point on the seam, and the resulting default
    // gamma_0 = min{1, |o|^2 / V_max(|o|)}. gamma_0 is exposed as a model
    // constant because the thin central part makes it a modeling choice.
    double abs_o() const { return pure_euclidean_ ? 0.0 : 2.0 * radius_; }

    double gamma0() const {
        if (gamma0_override_ > 0.0) return gamma0_override_;
        if (pure_euclidean_) return 1.0;
        const double ao = abs_o();
        return std::min(1.0, ao * ao / v_max(ao));
    }

    void set_gamma0(double g) {
        if (!(g > 0.0 && g <= 1.0)) throw std::invalid_argument("gamma0 must lie in (0, 1]");
        gamma0_override_ = g;
    }

private:
    std::vector<EndSpec> ends_;
    int m_;
    HeatBoundConstants constants_;
    double radius_;
    bool pure_euclidean_ = false;
    double gamma0_override_ = 0.0;
};

// A point on the glued model: end index plus Euclidean chart coordinates
// with ||coords|| >= central_radius. The seam sphere is shared by all
// sheets (same coordinates), so seam points with different sheet ids are
// the same point of the manifold.
struct SheetPoint {
    std::size_t sheet = 0;
    std::vector<double> coords;

    double norm() const {
        double s = 0.0;
        for (double c : coords) s += c * c;
        return std::sqrt(s);
    }
};

inline void validate_point(const ConnectedSumModel& model, const SheetPoint& x) {
    if (x.sheet >= model.num_ends()) throw std::invalid_argument("SheetPoint: sheet index out of range");
    if (x.coords.size() != static_cast<std::size_t>(model.real_dim()))
        throw std::invalid_argument("SheetPoint: wrong coordinate dimension");
    if (!model.pure_euclidean() && x.norm() < model.central_radius() * (1.0 - 1e-12))
        throw std::invalid_argument("SheetPoint: point inside the seam ball");
}

// rho(x) = ||coords|| - central_radius (reference offset rho_0 = 0).
inline double rho(const ConnectedSumModel& model, const SheetPoint& x) {
    if (model.pure_euclidean()) return x.norm();
    return x.norm() - model.central_radius();
}

// |x| = sup over the central part of the distance to x; extrinsic form.
inline double abs_point(const ConnectedSumModel& model, const SheetPoint& x) {
    if (model.pure_euclidean()) return x.norm();
    return x.norm() + model.central_radius();
}

struct DistanceResult {
    double d = 0.0;
    double d_empty = 0.0;
    double d_plus = 0.0;
};

namespace detail {

// Length of the shortest sheet path from a point at radius a to a seam
// point at angle psi from it (R = seam radius). The straight chord when it
// misses the open ball, i.e. psi <= arccos(R/a); otherwise tangent + arc.
inline double seam_leg(double a, double psi, double R) {
    const double cosc = std::min(1.0, R / a);
    const double psi_c = std::acos(cosc);
    if (psi <= psi_c) {
        const double chord2 = a * a + R * R - 2.0 * a * R * std::cos(psi);
        return std::sqrt(std::max(0.0, chord2));
    }
    return std::sqrt(std::max(0.0, a * a - R * R)) + R * (psi - psi_c);
}

inline double angle_between(const std::vector<double>& x, const std::vector<double>& y) {
    double dot = 0.0, nx = 0.0, ny = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        dot += x[i] * y[i];
        nx += x[i] * x[i];
        ny += y[i] * y[i];
    }
    if (nx == 0.0 || ny == 0.0) return 0.0;
    const double c = dot / std::sqrt(nx * ny);
    return std::acos(std::clamp(c, -1.0, 1.0));
}

} // namespace detail

// (d, d_empty, d_plus) on the glued model. See the header comment for the
// exact formulas; postconditions from the general theory are asserted.
inline DistanceResult distances(const ConnectedSumModel& model, const SheetPoint& x, const SheetPoint& y) {
    if (model.pure_euclidean())
        throw std::invalid_argument("distances: seam distances are defined on glued models only");
    validate_point(model, x);
    validate_point(model, y);
    const double R = model.central_radius();
    const double a = x.norm(), b = y.norm();
    const double theta = detail::angle_between(x.coords, y.coords);

    DistanceResult out;

    // d_empty: same sheet only
    if (x.sheet != y.sheet) {
        out.d_empty = std::numeric_limits<double>::infinity();
    } else {
        double chord2 = 0.0;
        for (std::size_t i = 0; i < x.coords.size(); ++i) {
            const double d = x.coords[i] - y.coords[i];
            chord2 += d * d;
        }
        const double chord = std::sqrt(chord2);
        // does the open ball obstruct the segment?
        bool obstructed = false;
        if (chord > 0.0) {
            double t = 0.0;
            for (std::size_t i = 0; i < x.coords.size(); ++i)
                t += x.coords[i] * (x.coords[i] - y.coords[i]);
            t /= chord2;
            if (t > 0.0 && t < 1.0) {
                double p2 = 0.0;
                for (std::size_t i = 0; i < x.coords.size(); ++i) {
                    const double p = x.coords[i] + t * (y.coords[i] - x.coords[i]);
                    p2 += p * p;
                }
                obstructed = p2 < R * R * (1.0 - 1e-14);
            }
        }
        if (!obstructed) {
            out.d_empty = chord;
        } else {
            const double wrap = theta - std::acos(std::min(1.0, R / a)) - std::acos(std::min(1.0, R / b));
            out.d_empty = std::sqrt(std::max(0.0, a * a - R * R)) +
                          std::sqrt(std::max(0.0, b * b - R * R)) + R * std::max(0.0, wrap);
        }
    }

    // d_plus: minimize over the seam point, which lies on the great-circle
    // arc between the two directions; 1-D unimodal search in the arc angle.
    const auto through = [&](double phi) {
        return detail::seam_leg(a, phi, R) + detail::seam_leg(b, theta - phi, R);
    };
    const double phi_star = minimize_scalar(through, 0.0, theta);
    out.d_plus = through(phi_star);

    out.d = std::min(out.d_empty, out.d_plus);

    // postconditions
    const double ax = abs_point(model, x), ay = abs_point(model, y);
    const double diam_k = 2.0 * R;
    const double slack = 1e-9 * (1.0 + ax + ay);
    if (out.d > out.d_empty + slack) throw std::logic_error("distances: d > d_empty");
    if (out.d_plus < ax + ay - 2.0 * diam_k - slack || out.d_plus > ax + ay + slack)
        throw std::logic_error("distances: d_plus outside [|x|+|y|-2 diam K, |x|+|y|]");
    return out;
}

// H(x, t) = min{1, |x|^2 / V(|x|) + (Int_{|x|^2}^t ds / V(sqrt s))^+ },
// taking V = the end profile of x. Scalar form: |x| given directly.
inline double h_function(const VolumeProfile& profile, double abs_x, double t) {
    if (!(t > 0.0)) throw std::domain_error("h_function: t must be positive");
    if (!(abs_x > 0.0)) throw std::domain_error("h_function: |x| must be positive");
    const double x2 = abs_x * abs_x;
    double value = x2 / profile(abs_x);
    if (t > x2) {
        const auto integrand = [&](double s) { return 1.0 / profile(std::sqrt(s)); };
        value += integrate(integrand, x2, t, 1e-12).value;
    }
    return std::min(1.0, value);
}

inline double h_function(const ConnectedSumModel& model, const SheetPoint& x, double t) {
    validate_point(model, x);
    return h_function(model.end(x.sheet).profile, abs_point(model, x), t);
}

// Growth envelope for the positive harmonic function witnessing the failure
// of the Liouville property: 1 + (Int_1^{|x|} dt / V(sqrt t))^+.
inline double liouville_envelope(const VolumeProfile& profile, double abs_x) {
    if (!(abs_x > 0.0)) throw std::domain_error("liouville_envelope: |x| must be positive");
    if (abs_x <= 1.0) return 1.0;
    const auto integrand = [&](double t) { return 1.0 / profile(std::sqrt(t)); };
    return 1.0 + integrate(integrand, 1.0, abs_x, 1e-12).value;
}

inline double liouville_envelope(const ConnectedSumModel& model, const SheetPoint& x) {
    validate_point(model, x);
    return liouville_envelope(model.end(x.sheet).profile, abs_point(model, x));
}

// Almost-complex obstruction for a connected sum of closed 4k-manifolds:
// chi(M) = sum chi_j - 2(theta - 1), tau(M) = sum tau_j, and the sum is
// obstructed iff chi(M) is incongruent to (-1)^k tau(M) mod 4.
inline bool almost_complex_obstruction(const std::vector<long>& chis, const std::vector<long>& taus,
                                       int k) {
    if (chis.empty() || taus.empty()) throw std::invalid_argument("almost_complex_obstruction: empty input");
    if (chis.size() != taus.size())
        throw std::invalid_argument("almost_complex_obstruction: list size mismatch");
    if (k < 1) throw std::invalid_argument("almost_complex_obstruction: k must be positive");
    const long theta = static_cast<long>(chis.size());
    long chi = -2 * (theta - 1), tau = 0;
    for (std::size_t j = 0; j < chis.size(); ++j) {
        chi += chis[j];
        tau += taus[j];
    }
    const long sign = (k % 2 == 0) ? 1 : -1;
    const long diff = chi - sign * tau;
    return ((diff % 4) + 4) % 4 != 0;
}

} // namespace nevlab
