#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "levylab/rng.hpp"

namespace levylab {

// Alpha-stable law in the parametrisation
//   E exp(itZ) = exp(-sigma^alpha |t|^alpha (1 - i beta sgn(t) u(t))),
//   u(t) = tan(pi alpha/2)          for alpha != 1,
//   u(t) = -(2/pi) log|t|           for alpha == 1.
struct StableLaw {
    double alpha = 1.0;
    double beta = 0.0;
    double sigma = 1.0;

    void validate() const {
        if (!(alpha > 0.0 && alpha < 2.0))
            throw std::invalid_argument("StableLaw: alpha must lie in (0,2), got " + std::to_string(alpha));
        if (!(beta >= -1.0 && beta <= 1.0))
            throw std::invalid_argument("StableLaw: |beta| <= 1 required");
        if (!(sigma > 0.0))
            throw std::invalid_argument("StableLaw: sigma > 0 required");
    }
};

inline std::complex<double> characteristic_function(const StableLaw& law, double t) {
    using std::numbers::pi;
    if (t == 0.0) return {1.0, 0.0};
    const double at = std::abs(t), sg = t > 0 ? 1.0 : -1.0;
    const double u = (law.alpha == 1.0) ? -(2.0 / pi) * std::log(at)
                                        : std::tan(pi * law.alpha / 2.0);
    const std::complex<double> expo =
        -std::pow(law.sigma, law.alpha) * std::pow(at, law.alpha) *
        std::complex<double>(1.0, -law.beta * sg * u);
    return std::exp(expo);
}

// Scale for matrix entries: sigma^alpha = pi / (2 sin(pi alpha/2) Gamma(alpha)),
// which normalises the tail so that P[|Z| > x] ~ x^{-alpha}.
inline double entry_scale(double alpha) {
    using std::numbers::pi;
    return std::pow(pi / (2.0 * std::sin(pi * alpha / 2.0) * std::tgamma(alpha)), 1.0 / alpha);
}

// Scale making the one-sided (beta=1) law of index a in (0,1) have Laplace
// transform E exp(-t S) = exp(-t^a): the beta=1 law with scale sigma has
// LT exp(-sigma^a t^a / cos(pi a/2)), so sigma = cos(pi a/2)^{1/a}.
inline double one_sided_unit_scale(double a) {
    using std::numbers::pi;
    if (!(a > 0.0 && a < 1.0))
        throw std::invalid_argument("one_sided_unit_scale: index must lie in (0,1)");
    return std::pow(std::cos(pi * a / 2.0), 1.0 / a);
}

// Chambers-Mallows-Stuck transform, one draw.
inline double sample_stable_one(const StableLaw& law, Rng& g) {
    using std::numbers::pi;
    const double U = pi * (g.uniform01() - 0.5);  // uniform (-pi/2, pi/2)
    const double W = g.exponential();
    const double a = law.alpha, b = law.beta;
    if (a == 1.0) {
        const double h = pi / 2.0;
        const double x = ((h + b * U) * std::tan(U) -
                          b * std::log((h * W * std::cos(U)) / (h + b * U))) / h;
        // The sigma*log(sigma) shift keeps the alpha=1 characteristic function
        // exactly in the parametrisation above.
        return law.sigma * x + (2.0 / pi) * b * law.sigma * std::log(law.sigma);
    }
    const double ta = std::tan(pi * a / 2.0);
    const double B = std::atan(b * ta) / a;
    const double S = std::pow(1.0 + b * b * ta * ta, 1.0 / (2.0 * a));
    const double x = S * std::sin(a * (U + B)) / std::pow(std::cos(U), 1.0 / a) *
                     std::pow(std::cos(U - a * (U + B)) / W, (1.0 - a) / a);
    return law.sigma * x;
}

inline std::vector<double> sample_stable(const StableLaw& law, std::size_t n, std::uint64_t seed) {
    law.validate();
    if (n == 0) throw std::invalid_argument("sample_stable: n must be >= 1");
    Rng g(seed, "stable.sample");
    std::vector<double> out(n);
    for (auto& v : out) v = sample_stable_one(law, g);
    return out;
}

// Matrix entry law: N^{-1/alpha} Z with Z symmetric alpha-stable at entry_scale.
inline std::vector<double> sample_entry(double alpha, std::size_t N, std::size_t n, std::uint64_t seed) {
    if (!(alpha > 0.0 && alpha < 2.0))
        throw std::invalid_argument("sample_entry: alpha must lie in (0,2)");
    if (N < 1) throw std::invalid_argument("sample_entry: N >= 1 required");
    StableLaw law{alpha, 0.0, entry_scale(alpha)};
    std::vector<double> out = sample_stable(law, n, seed);
    const double scale = std::pow(static_cast<double>(N), -1.0 / alpha);
    for (auto& v : out) v *= scale;
    return out;
}

// Poisson point process with intensity (alpha/2) x^{-alpha/2-1} dx on (0,inf),
// retained down to `cutoff`.
struct PppPoints {
    std::vector<double> points;  // strictly decreasing, all >= cutoff
    double cutoff = 0.0;
    double alpha = 0.0;
};

// Points above `cutoff` are xi_(k) = Gamma_k^{-2/alpha} for unit-rate arrival
// times Gamma_k, stopping once Gamma_k exceeds cutoff^{-alpha/2}.
inline void sample_ppp_into(double alpha, double cutoff, Rng& g, std::vector<double>& out) {
    out.clear();
    const double gamma_max = std::pow(cutoff, -alpha / 2.0);
    double arrival = 0.0;
    for (;;) {
        arrival += g.exponential();
        if (arrival > gamma_max) break;
        out.push_back(std::pow(arrival, -2.0 / alpha));
    }
}

inline PppPoints sample_ppp(double alpha, double cutoff, std::uint64_t seed) {
    if (!(alpha > 0.0 && alpha < 2.0))
        throw std::invalid_argument("sample_ppp: alpha must lie in (0,2)");
    if (!(cutoff > 0.0)) throw std::invalid_argument("sample_ppp: cutoff must be positive");
    PppPoints p;
    p.cutoff = cutoff;
    p.alpha = alpha;
    Rng g(seed, "stable.ppp");
    sample_ppp_into(alpha, cutoff, g, p.points);
    return p;
}

}  // namespace levylab
