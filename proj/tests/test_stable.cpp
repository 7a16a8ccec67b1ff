#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "levylab/stable.hpp"

using namespace levylab;
using std::numbers::pi;

namespace {

std::complex<double> empirical_cf(const std::vector<double>& xs, double t) {
    std::complex<double> acc{0.0, 0.0};
    for (double x : xs) acc += std::complex<double>(std::cos(t * x), std::sin(t * x));
    return acc / static_cast<double>(xs.size());
}

double two_sample_ks(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = a.size(), nb = b.size();
    double d = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] <= b[j]) ++i; else ++j;
        d = std::max(d, std::abs(i / na - j / nb));
    }
    return d;
}

}  // namespace

TEST_CASE("characteristic function matches the target law on a grid") {
    // Tolerance 4/sqrt(n) dominates the CF estimator noise (per-component sd <= 1/sqrt(2n)).
    const std::size_t n = 200000;
    const double tol = 4.0 / std::sqrt(static_cast<double>(n));
    const double ts[] = {-2.7, -1.0, -0.3, 0.3, 1.0, 2.7};
    int law_id = 0;
    for (StableLaw law : {StableLaw{0.6, 0.0, 1.0}, StableLaw{1.3, 0.0, 0.8},
                          StableLaw{1.7, 0.4, 1.2}, StableLaw{1.0, 0.0, 1.0},
                          StableLaw{1.0, 0.7, 1.0}, StableLaw{1.0, 1.0, 0.7},
                          StableLaw{0.75, 1.0, 0.5}}) {
        auto xs = sample_stable(law, n, 9000 + law_id++);
        for (double t : ts) {
            const auto diff = empirical_cf(xs, t) - characteristic_function(law, t);
            INFO("alpha=" << law.alpha << " beta=" << law.beta << " sigma=" << law.sigma << " t=" << t);
            REQUIRE(std::abs(diff) <= tol);
        }
    }
}

TEST_CASE("alpha=1 symmetric unit law hits E exp(iZ) = 1/e") {
    auto xs = sample_stable({1.0, 0.0, 1.0}, 200000, 17);
    REQUIRE(std::abs(empirical_cf(xs, 1.0) - std::complex<double>(std::exp(-1.0), 0.0)) < 0.01);
}

TEST_CASE("entry law at alpha=1, N=1 is a Cauchy of scale pi/2") {
    // Median of |Z| for a centred Cauchy equals its scale; entry_scale(1) = pi/2.
    REQUIRE(entry_scale(1.0) == Catch::Approx(pi / 2.0).epsilon(1e-12));
    auto xs = sample_entry(1.0, 1, 200000, 41);
    for (auto& v : xs) v = std::abs(v);
    std::nth_element(xs.begin(), xs.begin() + xs.size() / 2, xs.end());
    REQUIRE(xs[xs.size() / 2] == Catch::Approx(pi / 2.0).margin(0.02));
}

TEST_CASE("entry tail frequency P[|z|>x] x^alpha stays in a fixed bracket") {
    const double alpha = 1.5;
    auto xs = sample_entry(alpha, 1, 2000000, 7);
    for (double x : {10.0, 31.6, 100.0, 316.0}) {
        double count = 0;
        for (double v : xs) count += std::abs(v) > x;
        const double ratio = (count / xs.size()) * std::pow(x, alpha);
        INFO("x=" << x);
        REQUIRE(ratio > 0.5);
        REQUIRE(ratio < 2.0);
    }
}

TEST_CASE("entry symmetry: mean sign is zero within noise") {
    auto xs = sample_entry(1.5, 1000, 100000, 3);
    double s = 0;
    for (double v : xs) s += (v > 0) - (v < 0);
    REQUIRE(std::abs(s / xs.size()) < 3.0 / std::sqrt(static_cast<double>(xs.size())));
}

TEST_CASE("one-sided index 1/2 law equals 1/(2 normal^2) in distribution") {
    // With unit Laplace scale, the index-1/2 one-sided law is the hitting-time
    // law 1/(2 g^2), g standard normal: an exact two-sample oracle for the
    // beta=1 branch of the sampler.
    const std::size_t n = 50000;
    StableLaw law{0.5, 1.0, one_sided_unit_scale(0.5)};
    REQUIRE(law.sigma == Catch::Approx(0.5).epsilon(1e-12));
    auto a = sample_stable(law, n, 11);
    std::vector<double> b(n);
    Rng g(12, "test.halfstable");
    for (auto& v : b) {
        const double z = g.normal();
        v = 0.5 / (z * z);
    }
    const double crit = 1.628 * std::sqrt(2.0 / n);  // two-sample KS, 1% level
    REQUIRE(two_sample_ks(std::move(a), std::move(b)) < crit);
}

TEST_CASE("one-sided laws reproduce the stretched-exponential Laplace transform") {
    const std::size_t n = 400000;
    int id = 0;
    for (double index : {0.375, 0.5, 0.75}) {
        StableLaw law{index, 1.0, one_sided_unit_scale(index)};
        auto xs = sample_stable(law, n, 500 + id++);
        for (double t : {0.5, 1.0, 2.0}) {
            double m = 0, m2 = 0;
            for (double x : xs) {
                const double e = std::exp(-t * x);
                m += e;
                m2 += e * e;
            }
            m /= n;
            m2 /= n;
            const double se = std::sqrt(std::max(m2 - m * m, 0.0) / n);
            const double target = std::exp(-std::pow(t, index));
            INFO("index=" << index << " t=" << t);
            REQUIRE(std::abs(m - target) <= 3.0 * se + 1e-4);
        }
    }
}

TEST_CASE("ppp: construction invariants and count law") {
    SECTION("points decreasing and above cutoff, deterministic in the seed") {
        auto p = sample_ppp(1.0, 0.01, 99);
        REQUIRE(!p.points.empty());
        for (std::size_t i = 0; i < p.points.size(); ++i) {
            REQUIRE(p.points[i] >= p.cutoff);
            if (i) REQUIRE(p.points[i] < p.points[i - 1]);
        }
        auto q = sample_ppp(1.0, 0.01, 99);
        REQUIRE(p.points == q.points);
        REQUIRE(sample_ppp(1.0, 0.01, 100).points != p.points);
    }

    SECTION("mean count above u is u^{-alpha/2}") {
        const int draws = 4000;
        double total = 0;
        for (int r = 0; r < draws; ++r) total += sample_ppp(1.0, 0.01, 1000 + r).points.size();
        const double mean = total / draws;  // target 0.01^{-1/2} = 10
        REQUIRE(std::abs(mean - 10.0) < 4.0 * std::sqrt(10.0 / draws));
    }

    SECTION("count distribution passes a Poisson(10) chi-square at 1%") {
        // Bins {<=4},{5},...,{15},{>=16}: 13 cells fixed a priori, so the
        // critical value is the 0.99 quantile of chi-square with 12 dof.
        const int draws = 10000;
        std::vector<int> hist(13, 0);
        for (int r = 0; r < draws; ++r) {
            const int c = static_cast<int>(sample_ppp(1.0, 0.01, 77000 + r).points.size());
            hist[std::clamp(c, 4, 16) - 4] += 1;
        }
        std::vector<double> prob(13, 0.0);
        double cum = 0.0;
        for (int k = 0; k <= 15; ++k) {
            const double pmf = std::exp(-10.0 + k * std::log(10.0) - std::lgamma(k + 1.0));
            if (k <= 4) prob[0] += pmf;
            else prob[k - 4] = pmf;
            cum += pmf;
        }
        prob[12] = 1.0 - cum;  // tail >= 16
        double chi2 = 0.0;
        for (int b = 0; b < 13; ++b) {
            const double expect = draws * prob[b];
            chi2 += (hist[b] - expect) * (hist[b] - expect) / expect;
        }
        REQUIRE(chi2 < 26.217);  // chi-square 0.99 quantile, 12 dof
    }
}

TEST_CASE("parameter validation") {
    REQUIRE_THROWS_AS(sample_stable({1.0, 0.0, 1.0}, 0, 1), std::invalid_argument);
    REQUIRE_THROWS_AS(sample_stable({2.0, 0.0, 1.0}, 1, 1), std::invalid_argument);
    REQUIRE_THROWS_AS(sample_stable({0.5, 1.5, 1.0}, 1, 1), std::invalid_argument);
    REQUIRE_THROWS_AS(sample_stable({0.5, 0.0, -1.0}, 1, 1), std::invalid_argument);
    REQUIRE_THROWS_AS(sample_entry(2.2, 10, 1, 1), std::invalid_argument);
    REQUIRE_THROWS_AS(sample_ppp(1.0, 0.0, 1), std::invalid_argument);
}

TEST_CASE("identical seeds give byte-identical streams") {
    auto a = sample_stable({1.3, 0.2, 1.0}, 1000, 4242);
    auto b = sample_stable({1.3, 0.2, 1.0}, 1000, 4242);
    REQUIRE(a == b);
    Rng g1(5, "tag", 1), g2(5, "tag", 2), g3(5, "other", 1);
    REQUIRE(g1.next_u64() != g2.next_u64());
    REQUIRE(Rng(5, "tag", 1).next_u64() != g3.next_u64());
}
