#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "levylab/quad.hpp"
#include "levylab/rng.hpp"
#include "levylab/stable.hpp"

namespace levylab {

using cplx = std::complex<double>;

struct Population {
    std::vector<cplx> pool;
    cplx z;
    double alpha = 0.0;
    int generation = 0;
    bool converged = false;
};

struct MomentEstimate {
    double value = 0.0;
    double se = 0.0;
};

// p-th moment of Im R over the pool, with its standard error.
inline MomentEstimate pool_im_moment(const Population& pop, int p) {
    if (pop.pool.empty()) throw std::invalid_argument("pool_im_moment: empty pool");
    if (p < 1) throw std::invalid_argument("pool_im_moment: p >= 1");
    double s = 0.0, s2 = 0.0;
    for (cplx r : pop.pool) {
        const double v = std::pow(r.imag(), p);
        s += v;
        s2 += v * v;
    }
    const double n = static_cast<double>(pop.pool.size());
    const double mean = s / n;
    const double var = std::max(0.0, s2 / n - mean * mean);
    return {mean, std::sqrt(var / n)};
}

// Truncation point for the small-jump part of the weight process: below the
// returned cutoff the discarded jumps are replaced by their exact mean, and
// the cutoff is chosen so that the standard deviation of the discarded sum
// (for unit-modulus summands) stays below target_std.
inline double default_ppp_cutoff(double alpha, double target_std = 3e-3) {
    if (!(alpha > 0.0 && alpha < 2.0)) throw std::invalid_argument("default_ppp_cutoff: alpha in (0,2)");
    if (!(target_std > 0.0)) throw std::invalid_argument("default_ppp_cutoff: target_std > 0");
    return std::pow(target_std * target_std * (4.0 - alpha) / alpha, 1.0 / (2.0 - 0.5 * alpha));
}

// One fresh sample of -1/(z + sum_k xi_k R_k): weights are the points of the
// alpha/2-heavy point process above `cutoff`, partners drawn uniformly from
// the previous pool, and the discarded sub-cutoff mass enters through its
// exact mean comp_mass * comp_mean.
inline cplx rde_element(double alpha, cplx z, double cutoff,
                        const std::vector<cplx>& old_pool, cplx comp_mean, double comp_mass,
                        Rng& rng) {
    const double gamma_max = std::pow(cutoff, -0.5 * alpha);
    const double xi_exp = -2.0 / alpha;
    const double n = static_cast<double>(old_pool.size());
    cplx S = comp_mass * comp_mean;
    double G = rng.exponential();
    while (G < gamma_max) {
        const double xi = std::pow(G, xi_exp);
        const std::size_t idx = static_cast<std::size_t>(rng.uniform01() * n);
        S += xi * old_pool[idx];
        G += rng.exponential();
    }
    return -1.0 / (z + S);
}

// One synchronous whole-pool update.  Every element draws from its own
// substream keyed by (seed, generation, element), so results do not depend on
// evaluation order.
inline std::vector<cplx> rde_step(const std::vector<cplx>& old_pool, double alpha, cplx z,
                                  double cutoff, std::uint64_t seed, int generation) {
    cplx mean{0.0, 0.0};
    for (cplx r : old_pool) mean += r;
    mean /= static_cast<double>(old_pool.size());
    const double comp_mass = alpha / (2.0 - alpha) * std::pow(cutoff, 1.0 - 0.5 * alpha);

    std::vector<cplx> next(old_pool.size());
    for (std::size_t e = 0; e < old_pool.size(); ++e) {
        Rng rng(seed, "rde.update", static_cast<std::uint64_t>(generation), e);
        next[e] = rde_element(alpha, z, cutoff, old_pool, mean, comp_mass, rng);
    }
    return next;
}

// Population-dynamics solver for the recursive distributional equation
// R =d -(z + sum_k xi_k R_k)^{-1}.  Convergence compares the first two
// moments of Im R against their values ten generations back (consecutive
// generations are strongly autocorrelated, so a lag-1 comparison would fire
// during slow drifts); the pool counts as settled once the lag-10 change is
// below 1.5 standard errors twice in a row -- stationary pools fluctuate at
// about that level because the mean-field coupling keeps generations
// correlated.  Set min_generations = generations for a fixed budget with the
// flag evaluated only at the end.  `warm` seeds the pool from a previous
// solve at a nearby z.
inline Population solve_rde(double alpha, cplx z, std::size_t pool_size = 100000,
                            int generations = 200, double cutoff = -1.0, std::uint64_t seed = 1,
                            const std::vector<cplx>* warm = nullptr, int min_generations = 0) {
    if (!(alpha > 0.0 && alpha < 2.0)) throw std::invalid_argument("solve_rde: alpha in (0,2)");
    if (!(z.imag() > 0.0)) throw std::invalid_argument("solve_rde: Im z > 0 required");
    if (pool_size < 10000) throw std::invalid_argument("solve_rde: pool_size >= 10000");
    if (generations < 1) throw std::invalid_argument("solve_rde: generations >= 1");
    if (cutoff < 0.0) cutoff = default_ppp_cutoff(alpha);
    if (!(cutoff > 0.0 && cutoff < 1.0)) throw std::invalid_argument("solve_rde: cutoff in (0,1)");

    constexpr int lag = 10;
    Population pop;
    pop.alpha = alpha;
    pop.z = z;
    if (warm) {
        if (warm->size() != pool_size) throw std::invalid_argument("solve_rde: warm pool size mismatch");
        pop.pool = *warm;
    } else {
        pop.pool.assign(pool_size, -1.0 / z);
    }
    std::vector<std::pair<double, double>> hist;  // (m1, m2) per generation
    hist.reserve(generations + 1);
    hist.push_back({pool_im_moment(pop, 1).value, pool_im_moment(pop, 2).value});
    int streak = 0;
    for (int g = 0; g < generations; ++g) {
        pop.pool = rde_step(pop.pool, alpha, z, cutoff, seed, g);
        pop.generation = g + 1;
        const auto e1 = pool_im_moment(pop, 1);
        const auto e2 = pool_im_moment(pop, 2);
        hist.push_back({e1.value, e2.value});
        // no early verdicts during the initial transient
        if (pop.generation >= std::max(2 * lag, generations / 4)) {
            const auto& back = hist[hist.size() - 1 - lag];
            const bool settled = std::abs(e1.value - back.first) < 1.5 * e1.se &&
                                 std::abs(e2.value - back.second) < 1.5 * e2.se;
            streak = settled ? streak + 1 : 0;
            if (streak >= 2) {
                pop.converged = true;
                if (pop.generation >= min_generations) break;
            }
        }
    }
    if (streak < 2) pop.converged = false;
    return pop;
}

// Warm-started descent along a decreasing eta ladder at fixed energy: one
// cold solve at the top rung, then fixed-budget continuations.  Mixing slows
// roughly like 1/eta, so early stopping is disabled down the ladder.
inline std::vector<Population> solve_rde_ladder(double alpha, double E,
                                                const std::vector<double>& etas,
                                                std::size_t pool_size, int cold_generations,
                                                int rung_generations, double cutoff,
                                                std::uint64_t seed) {
    if (etas.empty()) throw std::invalid_argument("solve_rde_ladder: empty ladder");
    for (std::size_t k = 1; k < etas.size(); ++k)
        if (!(etas[k] < etas[k - 1])) throw std::invalid_argument("solve_rde_ladder: etas must decrease");
    std::vector<Population> rungs;
    for (std::size_t k = 0; k < etas.size(); ++k) {
        const cplx z{E, etas[k]};
        const std::uint64_t s = derive_key(seed, "rde.ladder", k);
        if (k == 0) {
            rungs.push_back(solve_rde(alpha, z, pool_size, cold_generations, cutoff, s, nullptr,
                                      cold_generations));
        } else {
            rungs.push_back(solve_rde(alpha, z, pool_size, rung_generations, cutoff, s,
                                      &rungs.back().pool, rung_generations));
        }
    }
    return rungs;
}

// Advances the pool for extra generations, recording the first two moments of
// Im R each generation; returns their time averages with batch-mean standard
// errors (five batches).  A single end-state pool mean wanders by two to
// three naive standard errors because generations stay correlated, so the
// time average is the estimator of record for small eta.
inline std::pair<MomentEstimate, MomentEstimate> time_averaged_moments(Population& pop,
                                                                       double cutoff,
                                                                       std::uint64_t seed,
                                                                       int extra_generations) {
    if (extra_generations < 10)
        throw std::invalid_argument("time_averaged_moments: need >= 10 generations");
    if (cutoff < 0.0) cutoff = default_ppp_cutoff(pop.alpha);
    std::vector<double> v1, v2;
    for (int g = 0; g < extra_generations; ++g) {
        pop.pool = rde_step(pop.pool, pop.alpha, pop.z, cutoff, seed,
                            pop.generation + g + 1000000);  // distinct substream block
        v1.push_back(pool_im_moment(pop, 1).value);
        v2.push_back(pool_im_moment(pop, 2).value);
    }
    pop.generation += extra_generations;
    auto batch = [](const std::vector<double>& v) -> MomentEstimate {
        const int B = 5;
        const std::size_t len = v.size() / B;
        double total = 0.0;
        std::vector<double> means(B, 0.0);
        for (int b = 0; b < B; ++b) {
            for (std::size_t i = b * len; i < (b + 1) * len; ++i) means[b] += v[i];
            means[b] /= static_cast<double>(len);
            total += means[b];
        }
        total /= B;
        double var = 0.0;
        for (double m : means) var += (m - total) * (m - total);
        return {total, std::sqrt(var / (B - 1) / B)};
    };
    return {batch(v1), batch(v2)};
}

struct LadderMoments {
    std::vector<double> etas;
    std::vector<MomentEstimate> m1, m2;  // time-averaged per rung
    MomentEstimate m1_at_zero, m2_at_zero;
    std::vector<Population> rungs;  // end states, reusable as warm starts
};

namespace detail {
// Intercept of the unweighted least-squares line with error propagated from
// per-point standard errors.
inline MomentEstimate intercept_with_se(const std::vector<double>& x,
                                        const std::vector<MomentEstimate>& y) {
    const std::size_t n = x.size();
    double xbar = 0.0;
    for (double v : x) xbar += v;
    xbar /= static_cast<double>(n);
    double sxx = 0.0;
    for (double v : x) sxx += (v - xbar) * (v - xbar);
    double a = 0.0, var = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double c = 1.0 / n - xbar * (x[k] - xbar) / sxx;
        a += c * y[k].value;
        var += c * c * y[k].se * y[k].se;
    }
    return {a, std::sqrt(var)};
}
}  // namespace detail

// Full small-eta pipeline: warm ladder, time-averaged moments per rung,
// linear extrapolation of both moments to eta = 0.
inline LadderMoments ladder_moments(double alpha, double E, const std::vector<double>& etas,
                                    std::size_t pool_size, int cold_generations,
                                    int rung_generations, int averaging_generations,
                                    double cutoff, std::uint64_t seed) {
    if (etas.size() < 2) throw std::invalid_argument("ladder_moments: need >= 2 etas");
    for (std::size_t k = 1; k < etas.size(); ++k)
        if (!(etas[k] < etas[k - 1])) throw std::invalid_argument("ladder_moments: etas must decrease");
    LadderMoments out;
    out.etas = etas;
    for (std::size_t k = 0; k < etas.size(); ++k) {
        const cplx z{E, etas[k]};
        const std::uint64_t s = derive_key(seed, "rde.ladder", k);
        if (k == 0)
            out.rungs.push_back(solve_rde(alpha, z, pool_size, cold_generations, cutoff, s,
                                          nullptr, cold_generations));
        else
            out.rungs.push_back(solve_rde(alpha, z, pool_size, rung_generations, cutoff, s,
                                          &out.rungs.back().pool, rung_generations));
        auto [e1, e2] = time_averaged_moments(out.rungs.back(), cutoff,
                                              derive_key(seed, "rde.avg", k),
                                              averaging_generations);
        out.m1.push_back(e1);
        out.m2.push_back(e2);
    }
    // extrapolate from the lowest three rungs; higher rungs only pre-anneal
    const std::size_t nfit = std::min<std::size_t>(3, etas.size());
    const std::size_t f = etas.size() - nfit;
    const std::vector<double> xt(etas.begin() + f, etas.end());
    out.m1_at_zero =
        detail::intercept_with_se(xt, {out.m1.begin() + f, out.m1.end()});
    out.m2_at_zero =
        detail::intercept_with_se(xt, {out.m2.begin() + f, out.m2.end()});
    return out;
}

// ---------------------------------------------------------------------------
// Quadrature backend for the limiting Stieltjes transform.

// Kq(c0, c1, p) = int_0^inf u^p exp(c0 u^{2/alpha} + c1 u) du for
// Re c0 < 0, Re c1 < 0 (either may be weakly negative if the other decays).
inline cplx kq_kernel(double alpha, cplx c0, cplx c1, double p) {
    if (c0.real() >= 0.0 && c1.real() >= 0.0)
        throw std::invalid_argument("kq_kernel: no decay direction");
    const double tiny = 1e-300;
    double U = 1e300;
    if (c0.real() < -tiny) U = std::min(U, std::pow(-45.0 / c0.real(), 0.5 * alpha));
    if (c1.real() < -tiny) U = std::min(U, -45.0 / c1.real());
    if (U >= 1e300) throw std::invalid_argument("kq_kernel: integrand does not decay");
    const double e = 2.0 / alpha;
    auto f = [&](double u) -> cplx {
        const double up = (p == 0.0) ? 1.0 : std::pow(u, p);
        return up * std::exp(c0 * std::pow(u, e) + c1 * u);
    };
    auto r = integrate(f, 0.0, U, 1e-13, 1e-11);
    if (!r.converged) throw std::runtime_error("kq_kernel: quadrature did not converge");
    return r.value;
}

namespace detail {
// Contour tilt for oscillatory decay at real energies; 0 when E = 0.
inline double contour_angle(double E) {
    if (E > 0.0) return 0.25 * M_PI;
    if (E < 0.0) return -0.25 * M_PI;
    return 0.0;
}
}  // namespace detail

// phi_{alpha,z}(x) = Gamma(alpha/2)^{-1} int_0^inf t^{alpha/2-1} e^{itz}
//                    exp(-Gamma(1-alpha/2) t^{alpha/2} x) dt,
// evaluated on a tilted ray for absolute convergence.
inline cplx phi_map(double alpha, cplx z, cplx x) {
    const double g1 = std::tgamma(1.0 - 0.5 * alpha);
    const double theta = detail::contour_angle(z.real());
    const cplx rot = std::polar(1.0, theta);
    const cplx rot_ah = std::polar(1.0, theta * 0.5 * alpha);
    const cplx k = kq_kernel(alpha, cplx{0, 1} * z * rot, -g1 * x * rot_ah, 0.0);
    return 2.0 / alpha / std::tgamma(0.5 * alpha) * rot_ah * k;
}

inline cplx psi_map(double alpha, cplx z, cplx x) {
    const double g1 = std::tgamma(1.0 - 0.5 * alpha);
    const double theta = detail::contour_angle(z.real());
    const cplx rot = std::polar(1.0, theta);
    const cplx rot_ah = std::polar(1.0, theta * 0.5 * alpha);
    const cplx k = kq_kernel(alpha, cplx{0, 1} * z * rot, -g1 * x * rot_ah, 2.0 / alpha - 1.0);
    return 2.0 / alpha * rot * k;
}

struct MAlphaOptions {
    double omega = 0.5;  // damping
    double tol = 1e-10;
    int max_iter = 500;
};

// Limiting Stieltjes transform via the damped fixed point y = phi(y),
// m = i psi(y).
inline cplx solve_m_alpha(double alpha, cplx z, MAlphaOptions opt = {}) {
    if (!(alpha > 0.0 && alpha < 2.0)) throw std::invalid_argument("solve_m_alpha: alpha in (0,2)");
    if (!(z.imag() > 0.0)) throw std::invalid_argument("solve_m_alpha: Im z > 0 required");
    cplx y{1.0, 0.0};
    for (int it = 0; it < opt.max_iter; ++it) {
        const cplx next = (1.0 - opt.omega) * y + opt.omega * phi_map(alpha, z, y);
        const double delta = std::abs(next - y);
        y = next;
        if (delta < opt.tol) {
            const cplx m = cplx{0, 1} * psi_map(alpha, z, y);
            if (!(m.imag() > 0.0)) throw std::runtime_error("solve_m_alpha: lost the upper half-plane");
            return m;
        }
    }
    throw std::runtime_error("solve_m_alpha: fixed point did not converge");
}

// ---------------------------------------------------------------------------
// Order parameter and density.

// gamma_z(u) = Gamma(1-alpha/2) E[((-iR).u)^{alpha/2}] with
// h.u = (Re u) h + (Im u) conj(h); principal branch powers.
inline std::vector<cplx> order_parameter(const Population& pop, const std::vector<cplx>& u_grid) {
    if (pop.pool.empty()) throw std::invalid_argument("order_parameter: empty pool");
    const double g1 = std::tgamma(1.0 - 0.5 * pop.alpha);
    const double half = 0.5 * pop.alpha;
    std::vector<cplx> out;
    out.reserve(u_grid.size());
    for (cplx u : u_grid) {
        const double a = u.real(), b = u.imag();
        cplx acc{0.0, 0.0};
        for (cplx r : pop.pool) {
            // (-iR).u for R = x+iy is y(a+b) - i x(a-b)
            acc += std::pow(cplx{r.imag() * (a + b), -r.real() * (a - b)}, half);
        }
        out.push_back(g1 * acc / static_cast<double>(pop.pool.size()));
    }
    return out;
}

inline std::vector<cplx> make_quarter_grid(int n) {
    if (n < 2) throw std::invalid_argument("make_quarter_grid: n >= 2");
    std::vector<cplx> u(n);
    for (int k = 0; k < n; ++k) u[k] = std::polar(1.0, 0.5 * M_PI * k / (n - 1));
    return u;
}

// Generation-averaged order parameter: advances the pool and averages the
// node values, for the same reason time_averaged_moments exists -- a single
// end-state pool moves all nodes coherently by a couple of naive standard
// errors, so a snapshot curve carries correlated noise that averaging removes.
inline std::vector<cplx> time_averaged_order_parameter(Population& pop,
                                                       const std::vector<cplx>& u_grid,
                                                       double cutoff, std::uint64_t seed,
                                                       int extra_generations) {
    if (extra_generations < 1)
        throw std::invalid_argument("time_averaged_order_parameter: need >= 1 generations");
    if (cutoff < 0.0) cutoff = default_ppp_cutoff(pop.alpha);
    std::vector<cplx> acc(u_grid.size(), cplx{0.0, 0.0});
    for (int g = 0; g < extra_generations; ++g) {
        pop.pool = rde_step(pop.pool, pop.alpha, pop.z, cutoff, seed,
                            pop.generation + g + 2000000);  // distinct substream block
        const auto snap = order_parameter(pop, u_grid);
        for (std::size_t j = 0; j < acc.size(); ++j) acc[j] += snap[j];
    }
    pop.generation += extra_generations;
    for (cplx& v : acc) v /= static_cast<double>(extra_generations);
    return acc;
}

struct GammaStarResult {
    std::vector<cplx> u_grid;
    std::vector<double> etas;                 // descending ladder
    std::vector<std::vector<cplx>> per_eta;   // [eta][u]
    std::vector<cplx> extrapolated;           // linear-in-eta fit at eta = 0
    bool monotone = true;                     // components move monotonically along the ladder
    bool smooth = true;                       // no outsized jump between adjacent grid points
};

// Order parameter at real energy E via a small-eta ladder and linear
// extrapolation (last three rungs).  With averaging_generations > 0 each
// rung value is a generation average rather than an end-state snapshot.
inline GammaStarResult gamma_star_at_real_E(double alpha, double E, std::vector<double> etas,
                                            const std::vector<cplx>& u_grid,
                                            std::size_t pool_size, int generations, double cutoff,
                                            std::uint64_t seed, int averaging_generations = 0) {
    if (etas.size() < 2) throw std::invalid_argument("gamma_star_at_real_E: need >= 2 etas");
    std::sort(etas.rbegin(), etas.rend());
    GammaStarResult res;
    res.u_grid = u_grid;
    res.etas = etas;
    auto rungs = solve_rde_ladder(alpha, E, etas, pool_size, generations,
                                  std::max(generations / 2, 30), cutoff, seed);
    for (std::size_t k = 0; k < rungs.size(); ++k) {
        if (averaging_generations > 0)
            res.per_eta.push_back(time_averaged_order_parameter(
                rungs[k], u_grid, cutoff, derive_key(seed, "rde.curve", k),
                averaging_generations));
        else
            res.per_eta.push_back(order_parameter(rungs[k], u_grid));
    }
    const std::size_t nfit = std::min<std::size_t>(3, etas.size());
    const std::size_t first = etas.size() - nfit;
    for (std::size_t j = 0; j < u_grid.size(); ++j) {
        std::vector<double> xs, re, im;
        for (std::size_t k = first; k < etas.size(); ++k) {
            xs.push_back(etas[k]);
            re.push_back(res.per_eta[k][j].real());
            im.push_back(res.per_eta[k][j].imag());
        }
        res.extrapolated.push_back({fit_line(xs, re).first, fit_line(xs, im).first});
        auto mono = [](const std::vector<double>& v) {
            bool up = true, dn = true;
            for (std::size_t i = 1; i < v.size(); ++i) {
                up &= v[i] >= v[i - 1];
                dn &= v[i] <= v[i - 1];
            }
            return up || dn;
        };
        if (!mono(re) || !mono(im)) res.monotone = false;
    }
    for (std::size_t j = 1; j < res.extrapolated.size(); ++j)
        if (std::abs(res.extrapolated[j] - res.extrapolated[j - 1]) > 0.5) res.smooth = false;
    return res;
}

enum class DensityBackend { pool, quadrature };

struct DensityResult {
    std::vector<double> energy;
    std::vector<double> rho;
    DensityBackend backend = DensityBackend::quadrature;
};

// Spectral density rho(E) = lim Im m(E + i eta)/pi, by linear extrapolation
// over the given eta ladder.
inline DensityResult density(double alpha, const std::vector<double>& energy_grid,
                             DensityBackend backend, std::vector<double> etas = {0.05, 0.025, 0.0125},
                             std::size_t pool_size = 30000, int generations = 60,
                             std::uint64_t seed = 1) {
    if (etas.size() < 2) throw std::invalid_argument("density: need >= 2 etas");
    std::sort(etas.rbegin(), etas.rend());
    DensityResult out;
    out.backend = backend;
    out.energy = energy_grid;
    for (std::size_t i = 0; i < energy_grid.size(); ++i) {
        std::vector<double> xs = etas, ys;
        if (backend == DensityBackend::quadrature) {
            for (double eta : etas)
                ys.push_back(solve_m_alpha(alpha, {energy_grid[i], eta}).imag() / M_PI);
        } else {
            const auto rungs = solve_rde_ladder(alpha, energy_grid[i], etas, pool_size,
                                               generations, std::max(generations / 2, 30), -1.0,
                                               derive_key(seed, "density", i));
            for (const auto& pop : rungs) ys.push_back(pool_im_moment(pop, 1).value / M_PI);
        }
        out.rho.push_back(fit_line(xs, ys).first);
    }
    return out;
}

inline double max_relative_gap(const DensityResult& a, const DensityResult& b) {
    if (a.energy != b.energy) throw std::invalid_argument("max_relative_gap: grids differ");
    double worst = 0.0;
    for (std::size_t i = 0; i < a.rho.size(); ++i) {
        const double scale = std::max(std::abs(a.rho[i]), std::abs(b.rho[i]));
        if (scale > 0.0) worst = std::max(worst, std::abs(a.rho[i] - b.rho[i]) / scale);
    }
    return worst;
}

// Both closed-form candidates for rho(0); they differ by the orientation of
// the Gamma-ratio inside the 1/alpha-th root.  `ratio_up` carries
// Gamma(1+alpha/2)/Gamma(1-alpha/2).
struct Rho0Candidates {
    double ratio_up;
    double ratio_down;
};

inline Rho0Candidates closed_form_rho0(double alpha) {
    if (!(alpha > 0.0 && alpha < 2.0)) throw std::invalid_argument("closed_form_rho0: alpha in (0,2)");
    const double pre = std::tgamma(1.0 + 2.0 / alpha) / M_PI;
    const double r = std::tgamma(1.0 + 0.5 * alpha) / std::tgamma(1.0 - 0.5 * alpha);
    return {pre * std::pow(r, 1.0 / alpha), pre * std::pow(r, -1.0 / alpha)};
}

// kappa in gamma_0(u) = kappa (Re u + Im u)^{alpha/2} at E = 0.
inline double kappa0(double alpha) {
    return std::sqrt(std::tgamma(1.0 - 0.5 * alpha) / std::tgamma(1.0 + 0.5 * alpha));
}

// Samples of the E = 0 overlap limit factor U = S^{-1}/Gamma(1+2/alpha) with
// S the one-sided alpha/2 law of unit Laplace scale; E[U] = 1.
inline std::vector<double> sample_ustar0(double alpha, std::size_t n, std::uint64_t seed) {
    if (!(alpha > 0.0 && alpha < 2.0)) throw std::invalid_argument("sample_ustar0: alpha in (0,2)");
    const double a = 0.5 * alpha;
    StableLaw law{a, 1.0, one_sided_unit_scale(a)};
    Rng rng(seed, "rde.ustar0");
    const double norm = std::tgamma(1.0 + 2.0 / alpha);
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = 1.0 / (sample_stable_one(law, rng) * norm);
    return out;
}

}  // namespace levylab
