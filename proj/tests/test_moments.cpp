#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include "levylab/limit_moments.hpp"
#include "levylab/rde.hpp"

using namespace levylab;
using Catch::Approx;
using std::complex;

namespace {

// the production arc resolution
OrderParameterCurve center_curve(double alpha, int n = 65) {
    std::vector<double> th(n);
    std::vector<cplx> v(n);
    for (int k = 0; k < n; ++k) {
        th[k] = 0.5 * M_PI * k / (n - 1);
        v[k] = zero_energy_gamma(alpha, th[k]);
    }
    return OrderParameterCurve(std::move(th), std::move(v));
}

OrderParameterCurve constant_curve(cplx g, int n = 9) {
    std::vector<double> th(n);
    std::vector<cplx> v(n, g);
    for (int k = 0; k < n; ++k) th[k] = 0.5 * M_PI * k / (n - 1);
    return OrderParameterCurve(std::move(th), std::move(v));
}

double closed_one_sided(double alpha, double g, int p) {
    return std::exp(std::log(2.0 / alpha) - std::lgamma(p) + std::lgamma(2.0 * p / alpha) -
                    (2.0 * p / alpha) * std::log(g));
}

}  // namespace

TEST_CASE("one-sided moment integral") {
    SECTION("zero-energy closed form") {
        REQUIRE(one_sided_moment_integral(1.0, 0.0, 1.0, 1).real() == Approx(2.0).epsilon(1e-9));
        REQUIRE(one_sided_moment_integral(1.0, 0.0, 2.0, 1).real() == Approx(0.5).epsilon(1e-9));
        for (double a : {0.8, 1.0, 1.5})
            for (double g : {0.7, 1.3})
                for (int p : {1, 2, 3, 6}) {
                    const auto x = one_sided_moment_integral(a, 0.0, g, p);
                    REQUIRE(x.real() == Approx(closed_one_sided(a, g, p)).epsilon(1e-9));
                    REQUIRE(std::abs(x.imag()) < 1e-9 * x.real());
                }
    }
    SECTION("energy reflection conjugates the integral") {
        const cplx g{1.2, 0.3};
        for (int p : {1, 2, 4}) {
            const auto plus = one_sided_moment_integral(1.3, 0.07, g, p);
            const auto minus = one_sided_moment_integral(1.3, -0.07, std::conj(g), p);
            REQUIRE(std::abs(minus - std::conj(plus)) < 1e-9 * std::abs(plus));
        }
    }
    SECTION("rejects bad arguments") {
        REQUIRE_THROWS_AS(one_sided_moment_integral(2.0, 0.0, 1.0, 1), std::invalid_argument);
        REQUIRE_THROWS_AS(one_sided_moment_integral(1.0, 0.0, 1.0, 0), std::invalid_argument);
        REQUIRE_THROWS_AS(one_sided_moment_integral(1.0, 0.0, 1.0, 61), std::invalid_argument);
        REQUIRE_THROWS_AS(one_sided_moment_integral(1.0, 0.0, cplx{-0.1, 1.0}, 1),
                          std::invalid_argument);
    }
}

TEST_CASE("order parameter curve") {
    auto curve = center_curve(1.5);
    SECTION("reproduces its nodes") {
        for (double th : curve.angles())
            REQUIRE(std::abs(curve(th) - cplx{zero_energy_gamma(1.5, th), 0.0}) < 1e-14);
    }
    SECTION("mid-node accuracy on the humped center profile") {
        // shape-preserving cubics are second order at the hump, so the
        // 65-node arc sits in the few-times-1e-4 range
        double worst = 0.0;
        for (int k = 0; k < 256; ++k) {
            const double th = 0.5 * M_PI * (k + 0.5) / 256;
            worst = std::max(worst, std::abs(curve(th).real() - zero_energy_gamma(1.5, th)));
        }
        REQUIRE(worst < 5e-4);
        const double est65 = curve.interp_error_estimate();
        const double est257 = center_curve(1.5, 257).interp_error_estimate();
        REQUIRE(est65 < 1e-3);
        REQUIRE(est257 < 1e-4);
        // second-order refinement: 4x finer grid, at least 8x smaller misfit
        REQUIRE(est257 < est65 / 8.0);
    }
    SECTION("clamps evaluation to the arc") {
        REQUIRE(std::abs(curve(-0.5) - curve(0.0)) == 0.0);
        REQUIRE(std::abs(curve(2.0) - curve(0.5 * M_PI)) == 0.0);
    }
    SECTION("min of the real part") {
        REQUIRE(curve.min_re() == Approx(zero_energy_gamma(1.5, 0.0)).epsilon(1e-12));
    }
    SECTION("constructor validation") {
        std::vector<double> th{0.0, 0.5, 1.0, 0.5 * M_PI};
        std::vector<cplx> four(4, cplx{1.0, 0.0});
        REQUIRE_NOTHROW(OrderParameterCurve(th, four));
        REQUIRE_THROWS_AS(OrderParameterCurve({0.0, 0.5, 1.0}, {four.begin(), four.begin() + 3}),
                          std::invalid_argument);
        REQUIRE_THROWS_AS(OrderParameterCurve({0.0, 0.6, 0.5, 0.5 * M_PI}, four),
                          std::invalid_argument);
        REQUIRE_THROWS_AS(OrderParameterCurve({0.1, 0.5, 1.0, 0.5 * M_PI}, four),
                          std::invalid_argument);
        REQUIRE_THROWS_AS(OrderParameterCurve({0.0, 0.5, 1.0, 1.4}, four), std::invalid_argument);
        REQUIRE_THROWS_AS(OrderParameterCurve(th, {four.begin(), four.begin() + 3}),
                          std::invalid_argument);
    }
}

TEST_CASE("two-sided moment integral") {
    SECTION("constant-curve polar closed form") {
        // with gamma constant on the arc the integral separates in polar
        // coordinates: (pi/2)(2/alpha) Gamma(4/alpha) gamma^{-4/alpha}
        for (double a : {1.0, 1.5}) {
            for (double g : {1.5, 2.0}) {
                const double expect = 0.5 * M_PI * (2.0 / a) * std::tgamma(4.0 / a) *
                                      std::pow(g, -4.0 / a);
                const auto y = two_sided_moment_integral(a, 0.0, constant_curve(g), 2, 1);
                REQUIRE(y.real() == Approx(expect).epsilon(1e-6));
                REQUIRE(std::abs(y.imag()) < 1e-6 * expect);
            }
        }
    }
    SECTION("split symmetry at zero energy") {
        auto curve = center_curve(1.0, 129);
        const auto y1 = two_sided_moment_integral(1.0, 0.0, curve, 3, 1);
        const auto y2 = two_sided_moment_integral(1.0, 0.0, curve, 3, 2);
        REQUIRE(std::abs(y1 - std::conj(y2)) < 1e-6 * std::abs(y1));
    }
    SECTION("coarse or invalid curves are refused") {
        REQUIRE_THROWS_AS(two_sided_moment_integral(1.0, 0.0, constant_curve({1.0, 0.0}, 4), 2, 1),
                          std::runtime_error);
        REQUIRE_THROWS_AS(two_sided_moment_integral(1.0, 0.0, constant_curve({-1.0, 0.0}), 2, 1),
                          std::runtime_error);
        REQUIRE_THROWS_AS(two_sided_moment_integral(1.0, 0.0, constant_curve({1.0, 0.0}), 2, 2),
                          std::invalid_argument);
        REQUIRE_THROWS_AS(two_sided_moment_integral(1.0, 0.0, constant_curve({1.0, 0.0}), 1, 1),
                          std::invalid_argument);
    }
}

TEST_CASE("moment combination matches the band-center closed form") {
    // at E = 0 every split integral collapses onto the one-sided value, so
    // the binomial combination must land on the closed form; run it through
    // the full interpolated-curve machinery
    for (double a : {1.0, 1.5}) {
        auto curve = center_curve(a, 257);
        for (int p : {1, 2, 3}) {
            const double got = im_resolvent_moment(a, 0.0, curve, p);
            REQUIRE(got == Approx(zero_energy_moment(a, p)).epsilon(3e-4));
        }
    }
    REQUIRE(zero_energy_moment(1.0, 1) == Approx(1.0).epsilon(1e-12));
    REQUIRE(zero_energy_moment(1.0, 2) == Approx(3.0).epsilon(1e-12));
    REQUIRE(zero_energy_moment(1.5, 1) == Approx(0.4768951).epsilon(1e-6));
    REQUIRE(zero_energy_moment(1.5, 2) == Approx(0.321836).epsilon(1e-5));
}

TEST_CASE("moment combination tracks the pool solver at fixed eta") {
    // at Im z > 0 the moment identity is exact, so a single settled pool can
    // check the whole chain with no extrapolation in the loop: feed the
    // pool's own order parameter into the integrals and compare against the
    // pool's own moments
    const double alpha = 1.0;
    const cplx z{0.03, 0.1};
    auto pop = solve_rde(alpha, z, 30000, 200, -1.0, 71);
    REQUIRE(pop.converged);
    auto grid = make_quarter_grid(65);
    auto gs = order_parameter(pop, grid);
    std::vector<double> th(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) th[k] = std::atan2(grid[k].imag(), grid[k].real());
    OrderParameterCurve curve(th, gs);
    for (int p : {1, 2}) {
        const double pred = im_resolvent_moment(alpha, z, curve, p);
        const auto got = pool_im_moment(pop, p);
        INFO("p " << p << " pool " << got.value << " +- " << got.se << " predicted " << pred);
        REQUIRE(std::abs(got.value - pred) < 0.02 * pred + 3.0 * got.se);
    }
}

TEST_CASE("order-parameter smoothing") {
    // per-node estimator noise at a realistic scale defeats the quadrature's
    // leave-one-out guard; the low-order fit restores a usable curve without
    // moving it
    const double alpha = 1.5;
    const int n = 65;
    std::vector<double> th(n);
    std::vector<cplx> noisy(n);
    Rng rng(123, "test.smooth");
    for (int k = 0; k < n; ++k) th[k] = 0.5 * M_PI * k / (n - 1);
    // pool-estimated curves obey gamma(pi/2 - th) = conj(gamma(th)) node by
    // node (the same pool feeds the mirrored angle), so the injected noise
    // has to respect that or the moment combination loses its reality
    for (int k = 0; 2 * k <= n - 1; ++k) {
        const cplx eps{4e-3 * rng.normal(), 2 * k == n - 1 ? 0.0 : 4e-3 * rng.normal()};
        noisy[k] = zero_energy_gamma(alpha, th[k]) + eps;
        noisy[n - 1 - k] = zero_energy_gamma(alpha, th[n - 1 - k]) + std::conj(eps);
    }
    OrderParameterCurve raw(th, noisy);
    REQUIRE(raw.interp_error_estimate() > 1e-3);
    REQUIRE_THROWS_AS(im_resolvent_moment(alpha, {0.0, 0.0}, raw, 2), std::runtime_error);

    // the remaining misfit is the cubic interpolant's own resolution limit at
    // this node count, well under the quadrature's acceptance threshold
    auto fit = smoothed_order_parameter_curve(alpha, th, noisy);
    REQUIRE(fit.interp_error_estimate() < 1e-3);
    REQUIRE(fit.interp_error_estimate() < 0.25 * raw.interp_error_estimate());
    for (double t : {0.1, 0.5, 1.0, 1.4}) {
        REQUIRE(fit(t).real() == Approx(zero_energy_gamma(alpha, t)).epsilon(5e-3));
        REQUIRE(std::abs(fit(t).imag()) < 5e-3);
    }
    REQUIRE(im_resolvent_moment(alpha, {0.0, 0.0}, fit, 2) ==
            Approx(zero_energy_moment(alpha, 2)).epsilon(0.01));

    REQUIRE_THROWS_AS(
        smoothed_order_parameter_curve(alpha, th, std::vector<cplx>(noisy.begin(), noisy.end() - 1)),
        std::invalid_argument);
    REQUIRE_THROWS_AS(smoothed_order_parameter_curve(alpha, th, noisy, 0), std::invalid_argument);
    REQUIRE_THROWS_AS(smoothed_order_parameter_curve(2.5, th, noisy), std::invalid_argument);
    // fewer nodes than the fit needs
    REQUIRE_THROWS_AS(
        smoothed_order_parameter_curve(alpha, std::vector<double>(th.begin(), th.begin() + 4),
                                       std::vector<cplx>(noisy.begin(), noisy.begin() + 4)),
        std::invalid_argument);
}

TEST_CASE("closed-form overlap moments") {
    SECTION("mean is exactly one") {
        for (double a : {0.7, 1.0, 1.37, 1.5, 1.9}) {
            REQUIRE(u_moment(a, 1) == 1.0);
            REQUIRE(median_moment(a, 1) == 1.0);
        }
    }
    SECTION("frozen values") {
        REQUIRE(median_moment(1.0, 2) == Approx(9.0).epsilon(1e-12));
        REQUIRE(median_moment(1.0, 3) == Approx(225.0).epsilon(1e-12));
        REQUIRE(median_moment(1.5, 2) == Approx(4.245350102723696).epsilon(1e-12));
        REQUIRE(u_moment(1.0, 2) == Approx(3.0).epsilon(1e-12));
        REQUIRE(u_moment(1.5, 2) == Approx(1.4151167).epsilon(1e-6));
    }
    SECTION("overflow and validation") {
        REQUIRE_THROWS_AS(median_moment(0.3, 50), std::overflow_error);
        REQUIRE_THROWS_AS(median_moment(1.0, 0), std::invalid_argument);
        REQUIRE_THROWS_AS(u_moment(2.0, 1), std::invalid_argument);
    }
    SECTION("joint covariance predictions") {
        auto j1 = joint_predictions(1.0);
        REQUIRE(j1.same_vector_cov == 0.0);
        REQUIRE(j1.neighbor_cov == Approx(2.0).epsilon(1e-12));
        REQUIRE(joint_predictions(1.5).neighbor_cov == Approx(0.4151167).epsilon(1e-5));
    }
    SECTION("moment growth stays below the determinacy threshold") {
        for (double a : {1.1, 1.3, 1.5, 1.9})
            for (int p = 2; p <= 12; ++p) {
                const double r = moment_growth_rate(a, p);
                INFO("alpha " << a << " p " << p << " growth " << r);
                REQUIRE(r < 2.0);
            }
        REQUIRE_THROWS_AS(moment_growth_rate(1.5, 1), std::invalid_argument);
    }
}

TEST_CASE("moment table") {
    auto curve = center_curve(1.0, 129);
    auto rows = limit_moment_table(1.0, 0.0, curve, 2);
    REQUIRE(rows.size() == 6);
    REQUIRE(rows[0].label == "im_resolvent_moment");
    REQUIRE(rows[0].method == "order-parameter quadrature");
    REQUIRE(rows[2].method == "closed form");
    // quadrature and closed-form rows describe the same quantity
    REQUIRE(rows[0].theory == Approx(rows[2].theory).epsilon(1e-3));
    REQUIRE(rows[1].theory == Approx(rows[3].theory).epsilon(1e-3));
    REQUIRE(rows[4].label == "overlap_moment");
    REQUIRE(rows[4].theory == 1.0);
}
