#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "nevlab/geometry.hpp"
#include "nevlab/heat_green.hpp"
#include "nevlab/numerics.hpp"

#include "oracles.hpp"

using namespace nevlab;

namespace {

// closed form for euclidean(m): Int_0^inf e^{-r^2/ct} / (V(sqrt t) t^p) dt
//   p = 0: (m!/pi^m) c^{m-1} Gamma(m-1) r^{2-2m}
//   p = 1: (m!/pi^m) c^m Gamma(m) r^{-2m}
double euclidean_tail_closed(int m, double c, int p, double r) {
    const double front = std::tgamma(m + 1.0) / std::pow(kPi, m);
    if (p == 0) return front * std::pow(c, m - 1) * std::tgamma(m - 1.0) * std::pow(r, 2 - 2 * m);
    return front * std::pow(c, m) * std::tgamma(static_cast<double>(m)) * std::pow(r, -2 * m);
}

ConnectedSumModel two_end_mixed() {
    HeatBoundConstants c;
    c.A = 1.0 / 32.0;
    c.B = 1.0 / 32.0;
    c.a = c.b = 4.0;
    std::vector<EndSpec> ends = {{VolumeProfile::euclidean(2), 0.0}, {VolumeProfile::power(1.0, 5.0), 0.0}};
    return ConnectedSumModel(std::move(ends), 2, c, 1.0);
}

} // namespace

TEST_CASE("tail integral matches euclidean closed forms") {
    const VolumeProfile prof = VolumeProfile::euclidean(2);
    for (double r : {0.5, 1.0, 2.0, 5.0, 17.0, 100.0}) {
        const double dt_weight = tail_integral(prof, 4.0, 0, r);
        CHECK(dt_weight == Catch::Approx(8.0 / (kPi * kPi * r * r)).epsilon(1e-10));
        const double dtt_weight = tail_integral(prof, 4.0, 1, r);
        CHECK(dtt_weight == Catch::Approx(32.0 / (kPi * kPi * std::pow(r, 4))).epsilon(1e-10));
    }
    // other dimensions and rates against the general closed form
    for (int m : {2, 3, 4}) {
        const VolumeProfile pm = VolumeProfile::euclidean(m);
        for (double c : {1.0, 4.0, 9.0}) {
            for (int p : {0, 1}) {
                const double got = tail_integral(pm, c, p, 3.0);
                CHECK(got == Catch::Approx(euclidean_tail_closed(m, c, p, 3.0)).epsilon(1e-9));
            }
        }
    }
}

TEST_CASE("tail integral error estimate and tolerance halving") {
    const TailIntegralSpec spec{VolumeProfile::power(0.8, 3.3), 2.5, 0, 2.0};
    const TailIntegralResult coarse = tail_integral_with_error(spec, 1e-8);
    const TailIntegralResult fine = tail_integral_with_error(spec, 5e-9);
    CHECK(std::fabs(coarse.value - fine.value) <= coarse.error + 1e-14 * std::fabs(coarse.value));
}

TEST_CASE("tail integral decreases to zero along a doubling grid") {
    const VolumeProfile prof = VolumeProfile::power(1.3, 3.1);
    double prev = tail_integral(prof, 2.0, 0, 0.5);
    for (double r = 1.0; r <= 512.0; r *= 2.0) {
        const double v = tail_integral(prof, 2.0, 0, r);
        CHECK(v < prev);
        prev = v;
    }
    // r^{2 - alpha} decay: the grid end sits at 512^{-1.1} of the unit scale
    CHECK(prev < tail_integral(prof, 2.0, 0, 1.0) * std::pow(512.0, 2.0 - 3.1) * 1.01);
}

TEST_CASE("divergent tail spec raises") {
    const VolumeProfile parabolic = VolumeProfile::power(1.0, 2.0);
    CHECK_THROWS_AS(tail_integral(parabolic, 4.0, 0, 1.0), std::domain_error);
    // the dt/t weight converges even for the parabolic profile
    CHECK(tail_integral(parabolic, 4.0, 1, 1.0) > 0.0);
}

TEST_CASE("euclidean heat kernel normalization") {
    CHECK(euclidean_heat_kernel(1.0 / (4.0 * kPi), 0.0, 1) == Catch::Approx(1.0).epsilon(1e-14));
    CHECK(euclidean_heat_kernel(1.0, 0.0, 2) == Catch::Approx(std::pow(4.0 * kPi, -2)).epsilon(1e-14));
    // mass over R^4 equals 1 (radial quadrature oracle)
    for (double t : {0.25, 1.0, 3.0}) {
        const auto radial = [&](double s) {
            return euclidean_heat_kernel(t, s, 2) * 2.0 * kPi * kPi * s * s * s;
        };
        const double mass = oracles::gauss_legendre(radial, 0.0, 40.0 * std::sqrt(t), 16);
        CHECK(mass == Catch::Approx(1.0).epsilon(1e-3));
    }
    CHECK_THROWS(euclidean_heat_kernel(0.0, 1.0, 2));
}

TEST_CASE("green closed form against the kernel time integral") {
    // G = 2 Int_0^inf p(t) dt, independent quadrature route
    for (double rho : {1.0, 2.0}) {
        const auto kernel_t = [&](double u) {
            const double t = std::exp(u);
            return 2.0 * euclidean_heat_kernel(t, rho, 2) * t;
        };
        const double g = oracles::gauss_legendre(kernel_t, -30.0, 30.0, 24);
        CHECK(green_euclidean(rho, 2) == Catch::Approx(g).epsilon(1e-9));
    }
    CHECK(green_euclidean(1.0, 2) == Catch::Approx(1.0 / (2.0 * kPi * kPi)).epsilon(1e-14));
    CHECK(green_euclidean(2.0, 2) == Catch::Approx(1.0 / (8.0 * kPi * kPi)).epsilon(1e-14));
    CHECK_THROWS(green_euclidean(0.0, 2));
}

TEST_CASE("green function homogeneity") {
    for (int m : {2, 3}) {
        for (double lambda : {0.5, 2.0, 7.0}) {
            const double ratio = green_euclidean(lambda * 1.3, m) / green_euclidean(1.3, m);
            CHECK(ratio == Catch::Approx(std::pow(lambda, 2 - 2 * m)).epsilon(1e-12));
        }
    }
}

TEST_CASE("green bounds collapse to the closed form with exact constants") {
    const ConnectedSumModel model = ConnectedSumModel::euclidean_space(2);
    for (double rho : {0.5, 1.0, 2.0, 5.0, 10.0}) {
        const BoundPair b = green_bounds(model, rho);
        const double exact = green_euclidean(rho, 2);
        CHECK(b.lower == Catch::Approx(exact).epsilon(1e-8));
        CHECK(b.upper == Catch::Approx(exact).epsilon(1e-8));
    }
    // doubling rho scales by 2^{2-2m}
    const double q = green_bounds(model, 2.0).lower / green_bounds(model, 1.0).lower;
    CHECK(q == Catch::Approx(0.25).epsilon(1e-9));
}

TEST_CASE("green bounds ordering on a mixed two-end model") {
    const ConnectedSumModel model = two_end_mixed();
    for (double rho : {1.0, 3.0, 10.0}) {
        const BoundPair b = green_bounds(model, rho);
        CHECK(b.lower > 0.0);
        CHECK(b.lower <= b.upper);
    }
}

TEST_CASE("two-sided kernel envelope contains the exact kernel") {
    ConnectedSumModel model = ConnectedSumModel::euclidean_space(2);
    // A = 1/32, a = 4 reproduces the kernel exactly; B = e/32, b = 5 pads it
    model.constants().B = std::exp(1.0) / 32.0;
    model.constants().b = 5.0;
    for (int i = 0; i < 20; ++i) {
        const double t = 0.01 * std::pow(1e4, i / 19.0);
        for (int j = 0; j < 20; ++j) {
            const double rho = 10.0 * j / 19.0;
            const BoundPair env = hk_two_sided(model, t, rho);
            const double exact = euclidean_heat_kernel(t, rho, 2);
            CHECK(env.lower <= exact * (1.0 + 1e-12));
            CHECK(exact <= env.upper * (1.0 + 1e-12));
        }
    }
    // rho = 0 reduces to the amplitude over the volume
    const BoundPair at0 = hk_two_sided(model, 2.0, 0.0);
    CHECK(at0.lower == Catch::Approx(model.constants().A / model.v_max(std::sqrt(2.0))));
    // t -> 0 with rho > 0 collapses both envelopes
    const BoundPair small = hk_two_sided(model, 1e-4, 1.0);
    CHECK(small.upper < 1e-100);
}

TEST_CASE("fit_bound_constants recovers the exact euclidean constants") {
    const ConnectedSumModel model = ConnectedSumModel::euclidean_space(2);
    std::vector<KernelSample> samples;
    for (double t : {0.25, 0.5, 1.0, 2.0, 4.0}) {
        for (double rho : {0.0, 0.5, 1.0, 2.0, 3.0}) {
            const double p = euclidean_heat_kernel(t, rho, 2);
            samples.push_back({t, rho, p, p});
        }
    }
    const BoundFit fit = fit_bound_constants(model, samples);
    // a = b = 4 is admissible with A = B = 1/32 and zero slack
    CHECK(fit.constants.a == Catch::Approx(4.0).epsilon(0.02));
    CHECK(fit.constants.b == Catch::Approx(4.0).epsilon(0.02));
    CHECK(fit.constants.A == Catch::Approx(1.0 / 32.0).epsilon(0.02));
    CHECK(fit.constants.B == Catch::Approx(1.0 / 32.0).epsilon(0.02));
    CHECK(fit.max_log_slack < 0.05);

    // noisy samples stay feasible with inflated slack, monotone in the noise
    double prev_slack = fit.mean_log_slack;
    for (double noise : {0.05, 0.10, 0.20}) {
        std::vector<KernelSample> noisy = samples;
        for (std::size_t i = 0; i < noisy.size(); ++i) {
            const double f = (i % 2 == 0) ? 1.0 + noise : 1.0 / (1.0 + noise);
            noisy[i].p_lo *= f;
            noisy[i].p_hi *= f;
        }
        const BoundFit nf = fit_bound_constants(model, noisy);
        CHECK(nf.mean_log_slack >= prev_slack - 1e-9);
        prev_slack = nf.mean_log_slack;
    }
}

TEST_CASE("fit_bound_constants rejects contradictory samples") {
    const ConnectedSumModel model = ConnectedSumModel::euclidean_space(2);
    std::vector<KernelSample> bad = {{1.0, 1.0, 2.0, 1.0}}; // lower band above upper
    CHECK_THROWS_AS(fit_bound_constants(model, bad), std::invalid_argument);
    std::vector<KernelSample> nonpos = {{1.0, 1.0, -1.0, 0.0}};
    CHECK_THROWS_AS(fit_bound_constants(model, nonpos), std::invalid_argument);
}

TEST_CASE("est1: euclidean slack closed form") {
    const VolumeProfile prof = VolumeProfile::euclidean(2);
    std::vector<double> grid;
    for (int i = 0; i <= 20; ++i) grid.push_back(0.1 * std::pow(1000.0, i / 20.0));
    const SlackReport rep = est1_check(prof, 4.0, grid);
    CHECK(rep.violations == 0);
    CHECK(rep.constant == Catch::Approx(std::exp(-0.25) / 2.0).epsilon(1e-12));
    // LHS V(r) is constant: for m=2, mu=4: 32/(pi^2 r^4) * pi^2 r^4/2 = 16
    for (std::size_t i = 0; i < rep.r.size(); ++i)
        CHECK(rep.lhs[i] * prof(rep.r[i]) == Catch::Approx(16.0).epsilon(1e-9));
}

TEST_CASE("est1 and est2 hold across dimensions and rates") {
    for (int m : {2, 3}) {
        const VolumeProfile prof = VolumeProfile::euclidean(m);
        for (double mu : {0.25, 1.0, 4.0, 16.0}) {
            std::vector<double> grid1, grid2;
            for (int i = 0; i <= 12; ++i) {
                grid1.push_back(std::pow(100.0, i / 12.0));
                grid2.push_back(1.05 * std::pow(100.0 / 1.05, i / 12.0));
            }
            const SlackReport r1 = est1_check(prof, mu, grid1);
            INFO("est1 m=" << m << " mu=" << mu);
            CHECK(r1.violations == 0);
            CHECK(r1.min_slack >= 1.0);
            const SlackReport r2 = est2_check(prof, mu, grid2);
            INFO("est2 m=" << m << " mu=" << mu);
            CHECK(r2.violations == 0);
            CHECK(r2.min_slack >= 1.0);
        }
    }
}

TEST_CASE("est1 on a sub-euclidean power law") {
    const VolumeProfile prof = VolumeProfile::power(1.0, 3.0);
    std::vector<double> grid;
    for (int i = 0; i <= 10; ++i) grid.push_back(std::pow(50.0, i / 10.0));
    const SlackReport rep = est1_check(prof, 2.0, grid);
    CHECK(rep.violations == 0);
}

TEST_CASE("est2 example values at r = 2") {
    const VolumeProfile prof = VolumeProfile::euclidean(2);
    const SlackReport rep = est2_check(prof, 4.0, {2.0});
    CHECK(rep.lhs[0] == Catch::Approx(8.0 / (kPi * kPi * 4.0)).epsilon(1e-9));
    // tail term: 2 Int_2^inf t dt / (pi^2 t^4 / 2) = 1/(2 pi^2)
    const double tail_term = 1.0 / (2.0 * kPi * kPi);
    CHECK(rep.rhs[0] == Catch::Approx(rep.constant * 4.0 / prof(2.0) + tail_term).epsilon(1e-9));
    CHECK(rep.min_slack > 1.0);
    // halving mu decreases the left side
    const SlackReport half = est2_check(prof, 2.0, {2.0});
    CHECK(half.lhs[0] < rep.lhs[0]);
    CHECK(half.violations == 0);
}

TEST_CASE("est2 ratio stays bounded on a doubling grid") {
    const VolumeProfile prof = VolumeProfile::euclidean(2);
    std::vector<double> grid;
    for (double r = 2.0; r <= 512.0; r *= 2.0) grid.push_back(r);
    const SlackReport rep = est2_check(prof, 4.0, grid);
    // both sides scale like 1/r^2: slack approaches a constant
    const double first = rep.slack.front(), last = rep.slack.back();
    CHECK(last == Catch::Approx(first).epsilon(0.2));
}

TEST_CASE("h and full bounds on the glued model") {
    HeatBoundConstants c;
    c.A = c.B = 1.0 / 32.0;
    c.a = c.b = 4.0;
    c.C1 = 0.1;
    c.c1 = 4.0;
    c.C2 = 10.0;
    c.c2 = 4.0;
    std::vector<EndSpec> ends = {{VolumeProfile::euclidean(2), 0.0}, {VolumeProfile::euclidean(2), 0.0}};
    const ConnectedSumModel model(std::move(ends), 2, c, 1.0);

    SheetPoint x{0, {2.0, 0.0, 0.0, 0.0}};
    SheetPoint y_same{0, {0.0, 2.0, 0.0, 0.0}};
    SheetPoint y_other{1, {0.0, 2.0, 0.0, 0.0}};

    const BoundPair same = hk_full_bounds(model, 1.0, x, y_same);
    const BoundPair other = hk_full_bounds(model, 1.0, x, y_other);
    CHECK(same.lower <= same.upper);
    CHECK(other.lower <= other.upper);
    // the cross-sheet pair loses the direct term: d_empty = infinity kills
    // the second exponential, so its upper bound is strictly smaller
    CHECK(other.upper < same.upper);

    // identical coordinates with different sheet labels on the seam are the
    // same manifold point
    SheetPoint seam0{0, {1.0, 0.0, 0.0, 0.0}};
    SheetPoint seam1{1, {1.0, 0.0, 0.0, 0.0}};
    const DistanceResult d = distances(model, seam0, seam1);
    CHECK(d.d == Catch::Approx(0.0).margin(1e-12));
}
