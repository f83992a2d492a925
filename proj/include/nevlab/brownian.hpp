#pragma once

// Monte Carlo Brownian motion with generator Laplacian/2: per-coordinate
// Gaussian increments of variance h (stated explicitly because factor-of-2
// conventions differ). Paths are deterministic functions of
// (seed, path index) through counter-based streams, so summaries are
// bit-identical for any thread count.
//
// Boundary and seam crossings are resolved on the straight step segment;
// for spherical boundaries the crossing fraction solves a quadratic, which
// is tighter than the required h^2 sub-stepping tolerance. Exit-time bias
// is O(h).
//
// Seam rule "uniform": bisect the step to the seam hit point, pick the
// continuation sheet uniformly among all sheets (re-entry included), keep
// the tangential part of the remaining increment and send the radial part
// outward in the new chart.

#include <cmath>
#include <cstdint>
#include <functional>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "nevlab/exhaustion.hpp"
#include "nevlab/geometry.hpp"
#include "nevlab/numerics.hpp"
#include "nevlab/parallel.hpp"
#include "nevlab/rng.hpp"

namespace nevlab {

enum class SeamRule { Uniform };

inline SeamRule parse_seam_rule(const std::string& name) {
    if (name == "uniform") return SeamRule::Uniform;
    throw std::invalid_argument("unknown seam rule: " + name);
}

struct PathConfig {
    double step = 1e-4;          // time increment h
    std::uint64_t n_paths = 10000;
    double horizon = 0.0;        // 0: use 50 * r^2
    std::uint64_t seed = 1;
    SeamRule seam_rule = SeamRule::Uniform;
    unsigned threads = 0;

    void validate() const {
        if (!(step > 0.0)) throw std::invalid_argument("PathConfig: step must be positive");
        if (n_paths == 0) throw std::invalid_argument("PathConfig: n_paths must be positive");
    }
};

struct ExitRecord {
    SheetPoint exit_point;
    double exit_time = 0.0;
    bool censored = false;               // horizon hit before exit
    std::vector<double> path_integrals;  // Int_0^tau w(X_t) dt per registered weight
};

struct ExitSummary {
    std::vector<ExitRecord> records;
    std::uint64_t censored_count = 0;
    double horizon = 0.0;
};

using PathWeight = std::function<double(const SheetPoint&)>;

namespace detail {

// First s in (0, 1] with ||x + s u|| = radius, or -1 if the segment stays
// on one side. `entering` selects the inward (true) or outward crossing.
inline double sphere_crossing(const std::vector<double>& x, const std::vector<double>& u, double radius,
                              bool entering) {
    double uu = 0.0, xu = 0.0, xx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        uu += u[i] * u[i];
        xu += x[i] * u[i];
        xx += x[i] * x[i];
    }
    if (uu == 0.0) return -1.0;
    const double c = xx - radius * radius;
    const double disc = xu * xu - uu * c;
    if (disc < 0.0) return -1.0;
    const double sq = std::sqrt(disc);
    // roots of ||x + s u||^2 = radius^2
    const double s1 = (-xu - sq) / uu;
    const double s2 = (-xu + sq) / uu;
    const double s = entering ? s1 : s2;
    if (s > 1e-15 && s <= 1.0) return s;
    // start exactly on the sphere moving through it
    if (entering && s1 <= 1e-15 && s1 > -1e-12 && xu < 0.0) return std::max(s1, 0.0);
    return -1.0;
}

struct GluedWalker {
    const ConnectedSumModel* model;
    double seam_radius;      // 0 for pure euclidean (no seam)
    double exit_radius;      // ||x|| at the exit surface
    std::vector<double> center; // exit sphere center (pure euclidean only)

    // advance one step; returns true if the path exited (s_exit set)
    bool step(SheetPoint& p, const std::vector<double>& incr, const RngStream& seam_stream,
              std::uint64_t& seam_counter, double& exit_fraction, SheetPoint& exit_point) const {
        std::vector<double> u = incr;
        double consumed = 0.0;
        for (int guard = 0; guard < 64; ++guard) {
            // exit crossing on the current segment
            std::vector<double> rel = p.coords;
            if (!center.empty())
                for (std::size_t i = 0; i < rel.size(); ++i) rel[i] -= center[i];
            const double s_exit = sphere_crossing(rel, u, exit_radius, /*entering=*/false);
            // seam crossing
            double s_seam = -1.0;
            if (seam_radius > 0.0) s_seam = sphere_crossing(p.coords, u, seam_radius, /*entering=*/true);

            if (s_exit >= 0.0 && (s_seam < 0.0 || s_exit <= s_seam)) {
                exit_point = p;
                for (std::size_t i = 0; i < u.size(); ++i) exit_point.coords[i] = p.coords[i] + s_exit * u[i];
                exit_fraction = consumed + s_exit * (1.0 - consumed);
                return true;
            }
            if (s_seam < 0.0) {
                for (std::size_t i = 0; i < u.size(); ++i) p.coords[i] += u[i];
                return false;
            }

            // hit the seam: move there, re-sheet, reflect the remaining
            // radial part outward, keep the tangential part
            std::vector<double> hit(p.coords.size());
            for (std::size_t i = 0; i < u.size(); ++i) hit[i] = p.coords[i] + s_seam * u[i];
            double hn = 0.0;
            for (double v : hit) hn += v * v;
            hn = std::sqrt(hn);
            std::vector<double> nrm(hit.size());
            for (std::size_t i = 0; i < hit.size(); ++i) nrm[i] = hit[i] / hn;

            std::vector<double> rest(u.size());
            for (std::size_t i = 0; i < u.size(); ++i) rest[i] = (1.0 - s_seam) * u[i];
            double rad = 0.0;
            for (std::size_t i = 0; i < u.size(); ++i) rad += rest[i] * nrm[i];
            if (rad < 0.0)
                for (std::size_t i = 0; i < u.size(); ++i) rest[i] -= 2.0 * rad * nrm[i];

            p.coords = hit;
            p.sheet = static_cast<std::size_t>(seam_stream.pick(seam_counter++, model->num_ends()));
            u = rest;
            consumed += s_seam * (1.0 - consumed);
            if (std::sqrt(rad * rad) == 0.0) { // tangent graze; finish the move
                for (std::size_t i = 0; i < u.size(); ++i) p.coords[i] += u[i];
                return false;
            }
        }
        return false; // pathological step; drop the remainder (O(h) effect)
    }
};

} // namespace detail

inline SheetPoint reference_point(const ConnectedSumModel& model) {
    SheetPoint o;
    o.sheet = 0;
    o.coords.assign(model.real_dim(), 0.0);
    if (!model.pure_euclidean()) o.coords[0] = model.central_radius();
    return o;
}

// Run n_paths killed at the boundary of Delta(r). Censored paths (horizon
// reached first) are flagged and counted, never silently dropped.
inline ExitSummary simulate_exit(const ConnectedSumModel& model, double r, const PathConfig& cfg,
                                 const std::vector<PathWeight>& weights = {},
                                 const SheetPoint* start_override = nullptr) {
    cfg.validate();
    if (!(r > 0.0)) throw std::invalid_argument("simulate_exit: r must be positive");
    if (!model.pure_euclidean() && r < containment_threshold(model))
        throw std::invalid_argument("simulate_exit: r below the K-containment threshold");

    const int dim = model.real_dim();
    const int pairs = dim / 2;
    const double h = cfg.step;
    const double horizon = cfg.horizon > 0.0 ? cfg.horizon : 50.0 * r * r;
    const SheetPoint o = start_override ? *start_override : reference_point(model);
    validate_point(model, o);

    detail::GluedWalker walker;
    walker.model = &model;
    walker.seam_radius = model.pure_euclidean() ? 0.0 : model.central_radius();
    if (model.pure_euclidean()) {
        walker.exit_radius = r;
        walker.center = o.coords;
    } else {
        walker.exit_radius = model.central_radius() + r;
        walker.center.clear();
    }

    ExitSummary out;
    out.horizon = horizon;
    out.records.resize(cfg.n_paths);

    parallel_for(cfg.n_paths, [&](std::uint64_t p) {
        const RngStream steps(cfg.seed, "mc/paths", p);
        const RngStream seam(cfg.seed, "mc/seam", p);
        const RngStream start(cfg.seed, "mc/start", p);
        std::uint64_t seam_counter = 0;

        SheetPoint x = o;
        // a start on the seam belongs to every sheet; draw the chart uniformly
        if (!model.pure_euclidean() && std::fabs(x.norm() - model.central_radius()) < 1e-12)
            x.sheet = static_cast<std::size_t>(start.pick(0, model.num_ends()));

        ExitRecord rec;
        rec.path_integrals.assign(weights.size(), 0.0);
        const double sqrt_h = std::sqrt(h);
        std::vector<double> incr(dim);
        double t = 0.0;
        bool exited = false;
        std::uint64_t k = 0;
        while (t < horizon) {
            for (int j = 0; j < pairs; ++j) {
                double g0, g1;
                steps.normal_pair(k * pairs + j, g0, g1);
                incr[2 * j] = sqrt_h * g0;
                incr[2 * j + 1] = sqrt_h * g1;
            }
            for (std::size_t w = 0; w < weights.size(); ++w)
                rec.path_integrals[w] += h * weights[w](x);
            double frac = 1.0;
            SheetPoint exit_point;
            if (walker.step(x, incr, seam, seam_counter, frac, exit_point)) {
                rec.exit_point = exit_point;
                rec.exit_time = t + frac * h;
                // trim the last weight contribution to the partial step
                for (std::size_t w = 0; w < weights.size(); ++w)
                    rec.path_integrals[w] -= (1.0 - frac) * h * weights[w](x);
                exited = true;
                break;
            }
            t += h;
            ++k;
        }
        if (!exited) {
            rec.censored = true;
            rec.exit_point = x;
            rec.exit_time = horizon;
        }
        out.records[p] = std::move(rec);
    }, cfg.threads);

    for (const auto& rec : out.records)
        if (rec.censored) ++out.censored_count;
    return out;
}

// Registered test functions for the Dynkin / Jensen-Dynkin verification.
// Each carries the exact value at a point, the spherical average of its
// Laplacian about the base point (for the deterministic side), and, where
// the function is singular along a polar set, the distributional mass of
// its Laplacian inside Delta(r) (log|z1| carries the counting-function
// weight of its zero plane).
struct DynkinTestFunction {
    std::string name;
    std::function<double(const std::vector<double>&)> value;
    // average of Delta phi over the sphere of radius s about the base point
    std::function<double(double s, const std::vector<double>& o)> laplacian_sphere_avg;
    // optional: (1/2) Int g_r d(distributional Laplacian), closed form
    std::function<double(double r, const std::vector<double>& o)> distributional_term;
};

inline DynkinTestFunction dynkin_function(const std::string& name, int m) {
    const int n = 2 * m;
    if (name == "coordinate")
        return {name, [](const std::vector<double>& x) { return x[0]; },
                [](double, const std::vector<double>&) { return 0.0; }, {}};
    if (name == "norm_sq")
        return {name,
                [](const std::vector<double>& x) {
                    double s = 0.0;
                    for (double c : x) s += c * c;
                    return s;
                },
                [n](double, const std::vector<double>&) { return 2.0 * n; }, {}};
    if (name == "harmonic_quad")
        return {name, [](const std::vector<double>& x) { return x[0] * x[0] - x[1] * x[1]; },
                [](double, const std::vector<double>&) { return 0.0; }, {}};
    if (name == "log_norm") {
        if (m != 2)
            throw std::invalid_argument("dynkin_function: log_norm spherical averages implemented for m=2");
        // Delta log||z|| = 2/||z||^2 on R^4; its mean over S(o, s) is
        // 2 max(s, ||o||)^{-2} because ||z||^{-2} is harmonic off the origin.
        return {name,
                [](const std::vector<double>& x) {
                    double s = 0.0;
                    for (double c : x) s += c * c;
                    return 0.5 * std::log(s);
                },
                [](double s, const std::vector<double>& o) {
                    double no = 0.0;
                    for (double c : o) no += c * c;
                    const double mx = std::max(s * s, no);
                    return 2.0 / mx;
                },
                {}};
    }
    if (name == "log_abs_z1") {
        if (m != 2)
            throw std::invalid_argument("dynkin_function: log_abs_z1 closed form implemented for m=2");
        // pointwise harmonic off {z1 = 0}, but the distributional Laplacian
        // carries 2 pi times the plane measure: the deterministic side gains
        // the slice integral of g_r over {z1 = 0}, which for m = 2 is
        // log(r/delta) - (1 - delta^2/r^2)/2 with delta = |z1(o)|.
        return {name,
                [](const std::vector<double>& x) {
                    return 0.5 * std::log(x[0] * x[0] + x[1] * x[1]);
                },
                [](double, const std::vector<double>&) { return 0.0; },
                [](double r, const std::vector<double>& o) {
                    const double delta = std::sqrt(o[0] * o[0] + o[1] * o[1]);
                    if (delta >= r) return 0.0;
                    return std::log(r / delta) - 0.5 * (1.0 - delta * delta / (r * r));
                }};
    }
    throw std::invalid_argument("dynkin_function: unknown name " + name);
}

struct DynkinResult {
    double lhs = 0.0;       // MC boundary average minus phi(o)
    double rhs = 0.0;       // (1/2) Int g_r Delta phi dv by radial quadrature
    double residual = 0.0;
    double std_error = 0.0; // MC standard error of the LHS
    std::uint64_t censored = 0;
};

// Jensen-Dynkin verification on the Euclidean model:
//   Int_{boundary} phi d pi_r - phi(o) = (1/2) Int_{Delta(r)} g_r Delta phi dv.
inline DynkinResult dynkin_check(const ConnectedSumModel& model, double r, const DynkinTestFunction& phi,
                                 const PathConfig& cfg, const SheetPoint* base_override = nullptr) {
    if (!model.pure_euclidean())
        throw std::invalid_argument("dynkin_check: deterministic side implemented for the Euclidean model");
    const SheetPoint o = base_override ? *base_override : reference_point(model);
    const double phi_o = phi.value(o.coords);
    if (!std::isfinite(phi_o)) throw std::invalid_argument("dynkin_check: phi(o) must be finite");

    const ExitSummary sim = simulate_exit(model, r, cfg, {}, &o);
    std::vector<double> vals;
    vals.reserve(sim.records.size());
    for (const auto& rec : sim.records)
        if (!rec.censored) vals.push_back(phi.value(rec.exit_point.coords));
    if (vals.empty()) throw std::runtime_error("dynkin_check: all paths censored");

    DynkinResult out;
    out.censored = sim.censored_count;
    out.lhs = mean(vals) - phi_o;
    out.std_error = std::sqrt(sample_variance(vals) / static_cast<double>(vals.size()));

    const int m = model.complex_dim();
    const double area = unit_sphere_area(2 * m);
    const auto integrand = [&](double s) {
        return phi.laplacian_sphere_avg(s, o.coords) * g_r_euclidean(s, r, m) * area *
               std::pow(s, 2 * m - 1);
    };
    out.rhs = 0.5 * integrate(integrand, 1e-12, r, 1e-10).value;
    if (phi.distributional_term) out.rhs += phi.distributional_term(r, o.coords);
    out.residual = std::fabs(out.lhs - out.rhs);
    return out;
}

struct OccupationBin {
    double rho_lo = 0.0, rho_hi = 0.0;
    double density = 0.0;    // E[time in bin] / bin volume
    double expected = 0.0;   // bin-averaged g_r
    std::uint64_t visits = 0;
};

struct OccupationReport {
    std::vector<OccupationBin> bins;
    double l1_relative_error = 0.0;
    std::uint64_t censored = 0;
    std::vector<std::size_t> empty_bins;
};

// Occupation density of paths killed at the boundary of Delta(r) against
// the Green function: E[time in shell] / vol(shell) ~ shell average of g_r.
inline OccupationReport occupation_density(const ConnectedSumModel& model, double r, std::size_t n_bins,
                                           const PathConfig& cfg) {
    if (n_bins == 0) throw std::invalid_argument("occupation_density: need at least one bin");
    const int dim = model.real_dim();
    const SheetPoint o = reference_point(model);

    // per-path time-in-bin accumulation (O(1) per step via the radial index)
    std::vector<std::vector<double>> per_path(cfg.n_paths);
    const double edge = r / static_cast<double>(n_bins);

    // reuse simulate_exit's stepping by registering indicator weights would
    // cost n_bins evaluations per step; instead re-run the walk inline.
    cfg.validate();
    if (!model.pure_euclidean() && r < containment_threshold(model))
        throw std::invalid_argument("occupation_density: r below the K-containment threshold");
    const double h = cfg.step;
    const double horizon = cfg.horizon > 0.0 ? cfg.horizon : 50.0 * r * r;
    const int pairs = dim / 2;

    detail::GluedWalker walker;
    walker.model = &model;
    walker.seam_radius = model.pure_euclidean() ? 0.0 : model.central_radius();
    walker.exit_radius = model.pure_euclidean() ? r : model.central_radius() + r;
    if (model.pure_euclidean()) walker.center = o.coords;

    std::vector<std::uint8_t> censored(cfg.n_paths, 0);
    parallel_for(cfg.n_paths, [&](std::uint64_t p) {
        const RngStream steps(cfg.seed, "mc/paths", p);
        const RngStream seam(cfg.seed, "mc/seam", p);
        const RngStream start(cfg.seed, "mc/start", p);
        std::uint64_t seam_counter = 0;
        std::vector<double>& occ = per_path[p];
        occ.assign(n_bins, 0.0);

        SheetPoint x = o;
        if (!model.pure_euclidean() && std::fabs(x.norm() - model.central_radius()) < 1e-12)
            x.sheet = static_cast<std::size_t>(start.pick(0, model.num_ends()));
        const double sqrt_h = std::sqrt(h);
        std::vector<double> incr(dim);
        double t = 0.0;
        std::uint64_t k = 0;
        bool exited = false;
        while (t < horizon) {
            for (int j = 0; j < pairs; ++j) {
                double g0, g1;
                steps.normal_pair(k * pairs + j, g0, g1);
                incr[2 * j] = sqrt_h * g0;
                incr[2 * j + 1] = sqrt_h * g1;
            }
            const double rx = rho(model, x);
            const std::size_t bin = std::min(n_bins - 1, static_cast<std::size_t>(rx / edge));
            occ[bin] += h;
            double frac = 1.0;
            SheetPoint exit_point;
            if (walker.step(x, incr, seam, seam_counter, frac, exit_point)) {
                occ[bin] -= (1.0 - frac) * h;
                exited = true;
                break;
            }
            t += h;
            ++k;
        }
        if (!exited) censored[p] = 1;
    }, cfg.threads);

    OccupationReport rep;
    for (auto c : censored) rep.censored += c;

    const int m = model.complex_dim();
    const double sheets = model.pure_euclidean() ? 1.0 : static_cast<double>(model.num_ends());
    const double offset = model.pure_euclidean() ? 0.0 : model.central_radius();
    for (std::size_t b = 0; b < n_bins; ++b) {
        OccupationBin bin;
        bin.rho_lo = b * edge;
        bin.rho_hi = (b + 1) * edge;
        const double vol = sheets * unit_ball_volume(2 * m) *
                           (std::pow(offset + bin.rho_hi, 2 * m) - std::pow(offset + bin.rho_lo, 2 * m));
        std::vector<double> times(cfg.n_paths);
        for (std::uint64_t p = 0; p < cfg.n_paths; ++p) times[p] = per_path[p][b];
        const double expected_time = mean(times);
        bin.density = expected_time / vol;
        for (std::uint64_t p = 0; p < cfg.n_paths; ++p)
            if (per_path[p][b] > 0.0) ++bin.visits;
        // bin-averaged g_r against the volume element
        const double lo = std::max(bin.rho_lo, 1e-9 * r);
        const auto gr_weighted = [&](double s) {
            return g_r(model, s, r) * sheets * unit_sphere_area(2 * m) * std::pow(offset + s, 2 * m - 1);
        };
        bin.expected = integrate(gr_weighted, lo, bin.rho_hi, 1e-10).value / vol;
        if (bin.visits == 0) rep.empty_bins.push_back(b);
        rep.bins.push_back(bin);
    }

    double num = 0.0, den = 0.0;
    for (const auto& b : rep.bins) {
        num += std::fabs(b.density - b.expected);
        den += std::fabs(b.expected);
    }
    rep.l1_relative_error = den > 0.0 ? num / den : 0.0;
    return rep;
}

struct KernelBin {
    double rho_lo = 0.0, rho_hi = 0.0;
    std::size_t sheet = 0;
    double estimate = 0.0;   // density estimate
    double std_error = 0.0;  // batch-means standard error
    std::uint64_t count = 0;
};

struct KernelEstimate {
    std::vector<KernelBin> bins;            // n_bins per sheet, sheet-major
    double inside_fraction = 0.0;           // mass landing inside the binned range
    std::uint64_t n_paths = 0;
    std::size_t n_bins = 0;
    std::size_t n_sheets = 1;
};

// Kernel density estimate of p(t, o, .) by radial binning of free paths
// (no killing), batch-means confidence intervals. rho_max fixes the binned
// range.
//
// p(t, x, y) is the fundamental solution of the full Laplacian, while the
// walk has generator Laplacian/2, so the estimator samples the walk at
// time 2t. (G = 2 Int p dt couples the same kernel to the Delta/2 potential
// theory used everywhere else.)
inline KernelEstimate heat_kernel_estimate(const ConnectedSumModel& model, double t, std::size_t n_bins,
                                           double rho_max, const PathConfig& cfg) {
    cfg.validate();
    if (!(t >= 10.0 * cfg.step)) throw std::invalid_argument("heat_kernel_estimate: need t >= 10 h");
    if (n_bins == 0 || !(rho_max > 0.0)) throw std::invalid_argument("heat_kernel_estimate: bad binning");
    const double walk_time = 2.0 * t;

    const int dim = model.real_dim();
    const int pairs = dim / 2;
    const std::size_t sheets = model.pure_euclidean() ? 1 : model.num_ends();
    const SheetPoint o = reference_point(model);
    const double edge = rho_max / static_cast<double>(n_bins);

    detail::GluedWalker walker;
    walker.model = &model;
    walker.seam_radius = model.pure_euclidean() ? 0.0 : model.central_radius();
    walker.exit_radius = std::numeric_limits<double>::infinity();
    if (model.pure_euclidean()) walker.center = o.coords;

    const std::uint64_t n_steps = static_cast<std::uint64_t>(std::ceil(walk_time / cfg.step - 1e-12));
    const double last_h = walk_time - (n_steps - 1) * cfg.step;

    std::vector<std::uint32_t> landing(cfg.n_paths); // bin id, or max for out of range
    const std::uint32_t kOutside = 0xffffffffu;
    parallel_for(cfg.n_paths, [&](std::uint64_t p) {
        const RngStream steps(cfg.seed, "mc/paths", p);
        const RngStream seam(cfg.seed, "mc/seam", p);
        const RngStream start(cfg.seed, "mc/start", p);
        std::uint64_t seam_counter = 0;
        SheetPoint x = o;
        if (!model.pure_euclidean() && std::fabs(x.norm() - model.central_radius()) < 1e-12)
            x.sheet = static_cast<std::size_t>(start.pick(0, model.num_ends()));
        std::vector<double> incr(dim);
        for (std::uint64_t k = 0; k < n_steps; ++k) {
            const double hk = (k + 1 == n_steps) ? last_h : cfg.step;
            const double sq = std::sqrt(hk);
            for (int j = 0; j < pairs; ++j) {
                double g0, g1;
                steps.normal_pair(k * pairs + j, g0, g1);
                incr[2 * j] = sq * g0;
                incr[2 * j + 1] = sq * g1;
            }
            double frac = 1.0;
            SheetPoint ex;
            walker.step(x, incr, seam, seam_counter, frac, ex);
        }
        double rel = 0.0;
        if (model.pure_euclidean()) {
            for (int i = 0; i < dim; ++i) {
                const double d = x.coords[i] - o.coords[i];
                rel += d * d;
            }
            rel = std::sqrt(rel);
        } else {
            rel = rho(model, x);
        }
        if (rel >= rho_max)
            landing[p] = kOutside;
        else
            landing[p] = static_cast<std::uint32_t>(x.sheet * n_bins +
                                                    static_cast<std::size_t>(rel / edge));
    }, cfg.threads);

    KernelEstimate out;
    out.n_paths = cfg.n_paths;
    out.n_bins = n_bins;
    out.n_sheets = sheets;
    const double offset = model.pure_euclidean() ? 0.0 : model.central_radius();
    const int m = model.complex_dim();

    constexpr std::size_t kBatches = 20;
    const std::uint64_t batch = (cfg.n_paths + kBatches - 1) / kBatches;
    std::uint64_t inside = 0;
    for (std::size_t s = 0; s < sheets; ++s) {
        for (std::size_t b = 0; b < n_bins; ++b) {
            KernelBin bin;
            bin.sheet = s;
            bin.rho_lo = b * edge;
            bin.rho_hi = (b + 1) * edge;
            const double vol = unit_ball_volume(2 * m) *
                               (std::pow(offset + bin.rho_hi, 2 * m) - std::pow(offset + bin.rho_lo, 2 * m));
            const std::uint32_t id = static_cast<std::uint32_t>(s * n_bins + b);
            std::vector<double> batch_est;
            std::uint64_t total = 0;
            for (std::size_t q = 0; q < kBatches; ++q) {
                const std::uint64_t lo = q * batch, hi = std::min<std::uint64_t>(cfg.n_paths, lo + batch);
                if (lo >= hi) break;
                std::uint64_t cnt = 0;
                for (std::uint64_t p = lo; p < hi; ++p) cnt += (landing[p] == id);
                total += cnt;
                batch_est.push_back(static_cast<double>(cnt) / (static_cast<double>(hi - lo) * vol));
            }
            bin.count = total;
            inside += total;
            bin.estimate = static_cast<double>(total) / (static_cast<double>(cfg.n_paths) * vol);
            bin.std_error = std::sqrt(sample_variance(batch_est) /
                                      static_cast<double>(batch_est.size()));
            out.bins.push_back(bin);
        }
    }
    out.inside_fraction = static_cast<double>(inside) / static_cast<double>(cfg.n_paths);
    return out;
}

// Versioned binary dump of exit records, for offline reanalysis.
// Layout (little endian): "NVLB", u32 version, u64 seed, u32 dim,
// u64 count, then per record: u64 index, f64 exit_time, u32 sheet,
// u32 censored, f64 coords[dim].
inline void write_path_dump(std::ostream& os, const ExitSummary& summary, std::uint64_t seed, int dim) {
    const auto put = [&](const void* p, std::size_t n) { os.write(static_cast<const char*>(p), n); };
    os.write("NVLB", 4);
    const std::uint32_t version = 1;
    put(&version, 4);
    put(&seed, 8);
    const std::uint32_t d32 = static_cast<std::uint32_t>(dim);
    put(&d32, 4);
    const std::uint64_t count = summary.records.size();
    put(&count, 8);
    for (std::uint64_t i = 0; i < count; ++i) {
        const auto& rec = summary.records[i];
        put(&i, 8);
        put(&rec.exit_time, 8);
        const std::uint32_t sheet = static_cast<std::uint32_t>(rec.exit_point.sheet);
        const std::uint32_t cens = rec.censored ? 1 : 0;
        put(&sheet, 4);
        put(&cens, 4);
        put(rec.exit_point.coords.data(), 8 * static_cast<std::size_t>(dim));
    }
}

struct PathDump {
    std::uint32_t version = 0;
    std::uint64_t seed = 0;
    std::uint32_t dim = 0;
    std::vector<ExitRecord> records;
};

inline PathDump read_path_dump(std::istream& is) {
    const auto get = [&](void* p, std::size_t n) {
        if (!is.read(static_cast<char*>(p), n)) throw std::runtime_error("path dump: truncated");
    };
    char magic[4];
    get(magic, 4);
    if (std::string(magic, 4) != "NVLB") throw std::runtime_error("path dump: bad magic");
    PathDump dump;
    get(&dump.version, 4);
    if (dump.version != 1) throw std::runtime_error("path dump: unsupported version");
    get(&dump.seed, 8);
    get(&dump.dim, 4);
    std::uint64_t count = 0;
    get(&count, 8);
    dump.records.resize(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        std::uint64_t idx;
        get(&idx, 8);
        ExitRecord& rec = dump.records[i];
        get(&rec.exit_time, 8);
        std::uint32_t sheet, cens;
        get(&sheet, 4);
        get(&cens, 4);
        rec.exit_point.sheet = sheet;
        rec.censored = cens != 0;
        rec.exit_point.coords.resize(dump.dim);
        get(rec.exit_point.coords.data(), 8 * dump.dim);
    }
    return dump;
}

} // namespace nevlab
