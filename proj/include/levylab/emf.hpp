#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <concepts>
#include <cstdint>
#include <map>
#include <numbers>
#include <stdexcept>
#include <utility>
#include <vector>

#include "levylab/ensemble.hpp"
#include "levylab/rde.hpp"
#include "levylab/rng.hpp"
#include "levylab/spectral.hpp"

namespace levylab {

// --- matrix-level Dyson Brownian motion --------------------------------------

struct DbmTrajectory {
    std::vector<double> times;
    std::vector<Eigen::MatrixXd> matrices;
    std::uint64_t seed = 0;

    const Eigen::MatrixXd& at_end() const { return matrices.back(); }
};

// X_{s+dt} = X_s + W with W symmetric Gaussian, entry variance (1+1_{i=j})dt/N.
// Additive increments make this exact in law at any step size; the grid only
// controls how many intermediate snapshots are kept.
inline DbmTrajectory evolve_dbm(const Eigen::MatrixXd& X0, double t_end, int steps,
                                std::uint64_t seed) {
    const int N = static_cast<int>(X0.rows());
    if (X0.cols() != N || N < 1) throw std::invalid_argument("evolve_dbm: square input required");
    const double scale = std::max(1.0, X0.cwiseAbs().maxCoeff());
    if ((X0 - X0.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
        throw std::invalid_argument("evolve_dbm: symmetric input required");
    if (t_end < 0.0) throw std::invalid_argument("evolve_dbm: t_end >= 0 required");
    if (steps < 1) throw std::invalid_argument("evolve_dbm: steps >= 1 required");

    DbmTrajectory out;
    out.seed = seed;
    out.times.push_back(0.0);
    out.matrices.push_back(X0);
    if (t_end == 0.0) return out;

    const double dt = t_end / steps;
    Eigen::MatrixXd X = X0;
    for (int k = 1; k <= steps; ++k) {
        Rng g(seed, "emf.dbm", static_cast<std::uint64_t>(k));
        X += gaussian_perturbation(N, dt, g);
        out.times.push_back(k * dt);
        out.matrices.push_back(X);
    }
    return out;
}

// --- jump-process generator over particle configurations ---------------------

struct GeneratorMove {
    std::size_t target;
    double rate;
};

// Conservative generator of the eigenvector moment flow on n-particle
// configurations: a particle hops i -> j at rate 2 xi_i (1 + 2 xi_j) / (N
// (lambda_i - lambda_j)^2).  States are enumerated once over the whole
// n-particle simplex (single-particle moves reach all of it), so generators
// built from the same starting configuration share state indexing regardless
// of any range restriction.
struct GeneratorMatrix {
    std::vector<ParticleConfig> states;
    std::map<std::map<int, int>, std::size_t> index;
    std::vector<std::vector<GeneratorMove>> moves;  // outgoing edges per state
    Eigen::VectorXd lambda;

    std::size_t size() const { return states.size(); }

    Eigen::VectorXd apply(const Eigen::VectorXd& f) const {
        if (f.size() != static_cast<Eigen::Index>(states.size()))
            throw std::invalid_argument("GeneratorMatrix: f dimension mismatch");
        Eigen::VectorXd out = Eigen::VectorXd::Zero(f.size());
        for (std::size_t k = 0; k < moves.size(); ++k) {
            double acc = 0.0;
            for (const auto& mv : moves[k])
                acc += mv.rate * (f[static_cast<Eigen::Index>(mv.target)] -
                                  f[static_cast<Eigen::Index>(k)]);
            out[static_cast<Eigen::Index>(k)] = acc;
        }
        return out;
    }

    double exit_rate(std::size_t k) const {
        double r = 0.0;
        for (const auto& mv : moves.at(k)) r += mv.rate;
        return r;
    }
    double max_exit_rate() const {
        double r = 0.0;
        for (std::size_t k = 0; k < moves.size(); ++k) r = std::max(r, exit_rate(k));
        return r;
    }
};

// range_ell = 0 keeps every move; range_ell = l > 0 keeps short moves
// |i-j| <= l, or with long_range = true exactly the complementary ones, so the
// two restricted generators sum to the full one edge by edge.
inline GeneratorMatrix build_generator(const Eigen::VectorXd& lambda, const ParticleConfig& xi0,
                                       int range_ell = 0, bool long_range = false) {
    const int N = static_cast<int>(lambda.size());
    if (N < 2) throw std::invalid_argument("build_generator: at least two sites required");
    if (xi0.N != N) throw std::invalid_argument("build_generator: config dimension mismatch");
    xi0.validate();
    if (xi0.sites.empty()) throw std::invalid_argument("build_generator: empty configuration");
    if (range_ell < 0) throw std::invalid_argument("build_generator: range_ell >= 0 required");
    if (long_range && range_ell == 0)
        throw std::invalid_argument("build_generator: long_range needs a positive range_ell");

    {  // rates scale as gap^{-2}; refuse (near-)degenerate spectra outright
        std::vector<double> s(lambda.data(), lambda.data() + N);
        std::sort(s.begin(), s.end());
        for (int i = 0; i + 1 < N; ++i)
            if (s[i + 1] - s[i] <= 1e-12)
                throw std::invalid_argument("build_generator: degenerate spectrum (gap <= 1e-12)");
    }

    const int n = xi0.total();
    {  // C(N+n-1, n) states in total; refuse before enumerating a huge space
        const double count =
            std::exp(std::lgamma(N + n) - std::lgamma(n + 1.0) - std::lgamma(N));
        if (count > 1e6 + 0.5)
            throw std::length_error("build_generator: configuration space exceeds 1e6 states");
    }

    GeneratorMatrix g;
    g.lambda = lambda;
    g.states.push_back(xi0);
    g.index[xi0.sites] = 0;
    for (std::size_t cur = 0; cur < g.states.size(); ++cur) {
        const std::map<int, int> sites = g.states[cur].sites;  // copy: states grows below
        std::vector<GeneratorMove> out;
        for (const auto& [i, mi] : sites) {
            for (int j = 1; j <= N; ++j) {
                if (j == i) continue;
                std::map<int, int> next = sites;
                if (--next[i] == 0) next.erase(i);
                ++next[j];
                auto [it, fresh] = g.index.try_emplace(std::move(next), g.states.size());
                if (fresh) g.states.push_back(ParticleConfig{it->first, N});
                const bool short_move = range_ell > 0 && std::abs(i - j) <= range_ell;
                if (range_ell > 0 && short_move == long_range) continue;
                const auto mj_it = sites.find(j);
                const int mj = mj_it == sites.end() ? 0 : mj_it->second;
                const double gap = lambda[i - 1] - lambda[j - 1];
                out.push_back({it->second, 2.0 * mi * (1.0 + 2.0 * mj) / (N * gap * gap)});
            }
        }
        g.moves.push_back(std::move(out));
    }
    return g;
}

// --- backward-equation integration -------------------------------------------

struct EmfSolution {
    Eigen::VectorXd f;
    bool stiffness_warning = false;  // some step had max exit rate * h > 0.1
    double max_rate_dt = 0.0;
    int steps = 0;
};

namespace detail {

// One classic RK4 step of f' = B(s) f using generators at s, s+h/2, s+h.
inline void rk4_step(const GeneratorMatrix& lo, const GeneratorMatrix& mid,
                     const GeneratorMatrix& hi, double h, Eigen::VectorXd& f) {
    const Eigen::VectorXd k1 = lo.apply(f);
    const Eigen::VectorXd k2 = mid.apply(f + (0.5 * h) * k1);
    const Eigen::VectorXd k3 = mid.apply(f + (0.5 * h) * k2);
    const Eigen::VectorXd k4 = hi.apply(f + h * k3);
    f += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace detail

// Time-dependent integration: gen_at(s) rebuilds the generator from the
// eigenvalue snapshot at time s; rates are refreshed at every RK4 stage time.
template <class GenAt>
    requires std::invocable<GenAt&, double>
inline EmfSolution integrate_emf(GenAt&& gen_at, Eigen::VectorXd f0, double s0, double s1,
                                 int ode_steps) {
    if (!(s1 >= s0)) throw std::invalid_argument("integrate_emf: s1 >= s0 required");
    if (ode_steps < 1) throw std::invalid_argument("integrate_emf: ode_steps >= 1 required");
    EmfSolution out;
    out.f = std::move(f0);
    out.steps = ode_steps;
    if (s1 == s0) return out;
    const double h = (s1 - s0) / ode_steps;
    GeneratorMatrix lo = gen_at(s0);
    if (out.f.size() != static_cast<Eigen::Index>(lo.size()))
        throw std::invalid_argument("integrate_emf: f0 dimension mismatch");
    for (int k = 0; k < ode_steps; ++k) {
        const double s = s0 + k * h;
        GeneratorMatrix mid = gen_at(s + 0.5 * h);
        GeneratorMatrix hi = gen_at(k + 1 == ode_steps ? s1 : s + h);
        out.max_rate_dt = std::max(out.max_rate_dt, h * lo.max_exit_rate());
        detail::rk4_step(lo, mid, hi, h, out.f);
        lo = std::move(hi);
    }
    out.stiffness_warning = out.max_rate_dt > 0.1;
    return out;
}

// Frozen-spectrum integration with a single generator.
inline EmfSolution integrate_emf(const GeneratorMatrix& gen, Eigen::VectorXd f0, double s0,
                                 double s1, int ode_steps) {
    if (!(s1 >= s0)) throw std::invalid_argument("integrate_emf: s1 >= s0 required");
    if (ode_steps < 1) throw std::invalid_argument("integrate_emf: ode_steps >= 1 required");
    if (f0.size() != static_cast<Eigen::Index>(gen.size()))
        throw std::invalid_argument("integrate_emf: f0 dimension mismatch");
    EmfSolution out;
    out.f = std::move(f0);
    out.steps = ode_steps;
    if (s1 == s0) return out;
    const double h = (s1 - s0) / ode_steps;
    out.max_rate_dt = h * gen.max_exit_rate();
    for (int k = 0; k < ode_steps; ++k) detail::rk4_step(gen, gen, gen, h, out.f);
    out.stiffness_warning = out.max_rate_dt > 0.1;
    return out;
}

// --- observable estimation vs the resolvent prediction -----------------------

struct FEstimate {
    double mean = 0.0;
    double se = 0.0;
    int replicas = 0;
};

// Monte Carlo mean and standard error of the normalised overlap product over
// replica decompositions.  An empty configuration gives exactly 1 with SE 0.
inline FEstimate estimate_F(const std::vector<SpectralSample>& samples,
                            const std::vector<std::pair<int, double>>& q,
                            const ParticleConfig& xi) {
    if (samples.size() < 100)
        throw std::invalid_argument("estimate_F: at least 100 replicas required");
    FEstimate out;
    out.replicas = static_cast<int>(samples.size());
    double s1 = 0.0, s2 = 0.0;
    for (const auto& sm : samples) {
        const double v = overlap_observable(sm, q, xi);
        s1 += v;
        s2 += v * v;
    }
    const double n = static_cast<double>(samples.size());
    out.mean = s1 / n;
    out.se = std::sqrt(std::max(s2 / n - out.mean * out.mean, 0.0) / n);
    return out;
}

// <q, (X - z)^{-1} q> from a stored decomposition; q sparse over entry indices.
inline std::complex<double> resolvent_quadratic_form(const SpectralSample& sample,
                                                     const std::vector<std::pair<int, double>>& q,
                                                     std::complex<double> z) {
    if (!(z.imag() > 0.0))
        throw std::invalid_argument("resolvent_quadratic_form: Im z > 0 required");
    std::vector<std::pair<const Eigen::VectorXd*, double>> rows;
    rows.reserve(q.size());
    for (auto [i, c] : q) rows.emplace_back(&sample.row(i), c);
    std::complex<double> acc{0.0, 0.0};
    for (int k = 0; k < sample.dim(); ++k) {
        double w = 0.0;
        for (auto [r, c] : rows) w += c * (*r)[k];
        acc += w * w / (sample.eigenvalues[k] - z);
    }
    return acc;
}

// Classical locations of the limiting spectral law near the band centre:
// gamma_k solves CDF(gamma_k) = k/N.  The density is tabulated on a fine grid
// over the window |E| <= 0.15 and inverted there; a site whose quantile falls
// outside the window is rejected.
inline std::map<int, double> limit_quantiles(double alpha, int N,
                                             const std::map<int, int>& sites) {
    if (N < 2) throw std::invalid_argument("limit_quantiles: N >= 2 required");
    for (auto [k, m] : sites)
        if (k < 1 || k > N || m < 1)
            throw std::invalid_argument("limit_quantiles: bad site map");
    using std::numbers::pi;
    const double W = 0.16;
    const int M = 320;  // trapezoid step 5e-4: cumulative error ~1e-8 on this window
    const double h = W / M;
    std::vector<double> F(M + 1, 0.0);  // F[j] = CDF(j h) - 1/2
    double rho_prev = solve_m_alpha(alpha, {0.0, 1e-6}).imag() / pi;
    for (int j = 1; j <= M; ++j) {
        const double rho = solve_m_alpha(alpha, {j * h, 1e-6}).imag() / pi;
        F[j] = F[j - 1] + 0.5 * h * (rho_prev + rho);
        rho_prev = rho;
    }
    const double edge = 0.15;
    const double u_max = F[static_cast<int>(std::floor(edge / h))];

    std::map<int, double> out;
    for (auto [k, m] : sites) {
        const double u = static_cast<double>(k) / N - 0.5;
        const double au = std::abs(u);
        if (au > u_max)
            throw std::out_of_range("limit_quantiles: site outside the central energy window");
        const auto it = std::lower_bound(F.begin(), F.end(), au);
        const std::size_t j = static_cast<std::size_t>(it - F.begin());
        double y;
        if (j == 0) {
            y = 0.0;
        } else {
            const double frac = (au - F[j - 1]) / (F[j] - F[j - 1]);
            y = h * (static_cast<double>(j - 1) + frac);
        }
        out[k] = u < 0.0 ? -y : y;  // the law is even, so the CDF - 1/2 is odd
    }
    return out;
}

// eta = N^{fc - fa}: the resolution at which the dynamics comparison is made.
inline double flow_eta(double frak_a, int N, double frak_c = 0.02) {
    if (N < 2) throw std::invalid_argument("flow_eta: N >= 2 required");
    if (!(frak_c > 0.0 && frak_c < frak_a))
        throw std::invalid_argument("flow_eta: 0 < frak_c < frak_a required");
    return std::pow(static_cast<double>(N), frak_c - frak_a);
}

// Replica average of prod_k (Im <q, R(gh_k + i eta) q> / Im m_alpha(g_k + i
// eta))^{xi_k} where gh_k is the empirical quantile of the replica ensemble
// and g_k the classical location of the limiting law.
inline FEstimate theory_rhs(const std::vector<SpectralSample>& samples, double alpha,
                            const std::vector<std::pair<int, double>>& q,
                            const ParticleConfig& xi, double eta) {
    if (samples.size() < 100)
        throw std::invalid_argument("theory_rhs: at least 100 replicas required");
    if (!(eta > 0.0)) throw std::invalid_argument("theory_rhs: eta > 0 required");
    xi.validate();
    FEstimate out;
    out.replicas = static_cast<int>(samples.size());
    if (xi.sites.empty()) {
        out.mean = 1.0;
        return out;
    }
    const int N = samples.front().dim();
    if (xi.N != N) throw std::invalid_argument("theory_rhs: config dimension mismatch");

    std::vector<Eigen::VectorXd> eigs;
    eigs.reserve(samples.size());
    for (const auto& sm : samples) eigs.push_back(sm.eigenvalues);
    const std::vector<double> gamma_hat = empirical_quantiles(eigs);
    const std::map<int, double> gamma = limit_quantiles(alpha, N, xi.sites);

    std::map<int, std::complex<double>> zhat;
    std::map<int, double> denom;
    for (auto [k, m] : xi.sites) {
        zhat[k] = {gamma_hat[static_cast<std::size_t>(k - 1)], eta};
        const double d = solve_m_alpha(alpha, {gamma.at(k), eta}).imag();
        if (!(d > 0.0)) throw std::runtime_error("theory_rhs: limit factor not positive");
        denom[k] = d;
    }

    double s1 = 0.0, s2 = 0.0;
    for (const auto& sm : samples) {
        double v = 1.0;
        for (auto [k, m] : xi.sites) {
            const double num = resolvent_quadratic_form(sm, q, zhat.at(k)).imag();
            v *= std::pow(num / denom.at(k), m);
        }
        s1 += v;
        s2 += v * v;
    }
    const double n = static_cast<double>(samples.size());
    out.mean = s1 / n;
    out.se = std::sqrt(std::max(s2 / n - out.mean * out.mean, 0.0) / n);
    return out;
}

}  // namespace levylab
