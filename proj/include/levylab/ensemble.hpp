#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>

#include "levylab/rng.hpp"
#include "levylab/stable.hpp"

namespace levylab {

// Exponent parameters for the heavy-tailed ensemble and its three-tier
// decomposition.  The five constraints below must hold jointly; nu plays the
// role of the small-entry threshold exponent, rho of the large-entry one.
struct EnsembleSpec {
    double alpha = 1.0;
    int N = 0;
    double b = 0.0;
    double nu = 0.0;
    double frak_a = 0.0;
    double rho = 0.0;
    std::uint64_t seed = 0;

    void validate() const {
        if (!(alpha > 0.0 && alpha < 2.0))
            throw std::invalid_argument("EnsembleSpec: alpha must lie in (0,2)");
        auto fail = [&](const std::string& what) {
            throw std::invalid_argument("EnsembleSpec: constraint violated: " + what);
        };
        if (std::abs(nu - (1.0 / alpha - b)) > 1e-12 || !(nu > 0.0)) fail("nu = 1/alpha - b > 0");
        if (!(1.0 / (4.0 - alpha) < nu && nu < 1.0 / (4.0 - 2.0 * alpha))) fail("1/(4-a) < nu < 1/(4-2a)");
        if (!((2.0 - alpha) * nu < frak_a && frak_a < 0.5)) fail("(2-a)nu < frak_a < 1/2");
        if (!(0.0 < rho && rho < nu && nu < 0.5)) fail("0 < rho < nu < 1/2");
        if (!(alpha * rho < (2.0 - alpha) * nu)) fail("a rho < (2-a)nu");
    }
};

// Midpoint of each feasible interval, chosen in the order nu, b, frak_a, rho.
inline EnsembleSpec select_parameters(double alpha) {
    if (!(alpha > 0.0 && alpha < 2.0))
        throw std::invalid_argument("select_parameters: alpha must lie in (0,2)");
    EnsembleSpec s;
    s.alpha = alpha;
    const double nu_lo = 1.0 / (4.0 - alpha);
    const double nu_hi = std::min(1.0 / (4.0 - 2.0 * alpha), 0.5);
    s.nu = 0.5 * (nu_lo + nu_hi);
    s.b = 1.0 / alpha - s.nu;
    s.frak_a = 0.5 * ((2.0 - alpha) * s.nu + 0.5);
    s.rho = 0.5 * std::min(s.nu, (2.0 - alpha) * s.nu / alpha);
    s.validate();
    return s;
}

inline EnsembleSpec make_spec(double alpha, int N, std::uint64_t seed) {
    EnsembleSpec s = select_parameters(alpha);
    s.N = N;
    s.seed = seed;
    return s;
}

// Symmetric matrix with i.i.d. heavy-tailed upper-triangle entries
// N^{-1/alpha} Z at the standard tail normalisation.
inline Eigen::MatrixXd build_levy(const EnsembleSpec& spec) {
    spec.validate();
    if (spec.N < 2) throw std::invalid_argument("build_levy: N >= 2 required");
    const int N = spec.N;
    const StableLaw law{spec.alpha, 0.0, entry_scale(spec.alpha)};
    const double scale = std::pow(static_cast<double>(N), -1.0 / spec.alpha);
    Rng g(spec.seed, "ensemble.H");
    Eigen::MatrixXd H(N, N);
    for (int i = 0; i < N; ++i)
        for (int j = i; j < N; ++j) {
            const double v = scale * sample_stable_one(law, g);
            H(i, j) = v;
            H(j, i) = v;
        }
    return H;
}

struct DecomposedMatrix {
    Eigen::MatrixXd A, B, C;                                      // H = A + B + C entrywise
    Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic> Psi;  // 1 where |H| >= N^{-rho}
    EnsembleSpec spec;
};

// Deterministic thresholding: every entry lands in exactly one tier, so the
// sum reproduces H to the last bit.
inline DecomposedMatrix decompose(const Eigen::MatrixXd& H, const EnsembleSpec& spec) {
    spec.validate();
    const int N = static_cast<int>(H.rows());
    if (H.cols() != N || N != spec.N) throw std::invalid_argument("decompose: dimension mismatch");
    const double thr_small = std::pow(static_cast<double>(N), -spec.nu);
    const double thr_large = std::pow(static_cast<double>(N), -spec.rho);
    if (!(thr_small < thr_large))
        throw std::invalid_argument("decompose: thresholds out of order (need nu > rho)");
    DecomposedMatrix d;
    d.spec = spec;
    d.A = Eigen::MatrixXd::Zero(N, N);
    d.B = Eigen::MatrixXd::Zero(N, N);
    d.C = Eigen::MatrixXd::Zero(N, N);
    d.Psi.setZero(N, N);
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) {
            const double v = H(i, j), av = std::abs(v);
            if (av >= thr_large) {
                d.C(i, j) = v;
                d.Psi(i, j) = 1;
            } else if (av >= thr_small) {
                d.B(i, j) = v;
            } else {
                d.A(i, j) = v;
            }
        }
    return d;
}

struct PerturbTime {
    double t = 0.0;
    double estimator_se = 0.0;
    double bracket_lo = 0.0, bracket_hi = 0.0;  // recorded loose bracket c,C * N^{(alpha-2)nu}
};

// Comparison time t = N E[H11^2; |H11| < N^{-nu}] / P[|H11| < N^{-rho}] by
// Monte Carlo over the entry law.  The bracket constants are loose (1e3
// head-room) because the sharp ones are not explicit.
inline PerturbTime compute_t(const EnsembleSpec& spec, std::size_t mc_samples) {
    spec.validate();
    if (mc_samples < 100000) throw std::invalid_argument("compute_t: mc_samples >= 1e5 required");
    const double dN = static_cast<double>(spec.N);
    const double thr_small = std::pow(dN, -spec.nu);
    const double thr_large = std::pow(dN, -spec.rho);
    const StableLaw law{spec.alpha, 0.0, entry_scale(spec.alpha)};
    const double scale = std::pow(dN, -1.0 / spec.alpha);
    Rng g(spec.seed, "ensemble.t");
    double sw = 0, sww = 0, sv = 0, svv = 0, swv = 0;
    for (std::size_t k = 0; k < mc_samples; ++k) {
        const double x = scale * sample_stable_one(law, g);
        const double w = (std::abs(x) < thr_small) ? x * x : 0.0;
        const double v = (std::abs(x) < thr_large) ? 1.0 : 0.0;
        sw += w;
        sww += w * w;
        sv += v;
        svv += v * v;
        swv += w * v;
    }
    const double n = static_cast<double>(mc_samples);
    const double mw = sw / n, mv = sv / n;
    const double varw = sww / n - mw * mw, varv = svv / n - mv * mv;
    const double cov = swv / n - mw * mv;
    PerturbTime out;
    out.t = dN * mw / mv;
    // Delta method for the ratio estimator.
    out.estimator_se = out.t * std::sqrt(std::max(
        (varw / (mw * mw) + varv / (mv * mv) - 2.0 * cov / (mw * mv)) / n, 0.0));
    const double scale_t = std::pow(dN, (spec.alpha - 2.0) * spec.nu);
    out.bracket_lo = 1e-3 * scale_t;
    out.bracket_hi = 1e3 * scale_t;
    if (out.estimator_se > 0.01 * out.t)
        throw std::runtime_error("compute_t: SE/t > 1%, increase mc_samples");
    if (!(out.t >= out.bracket_lo && out.t <= out.bracket_hi))
        throw std::runtime_error("compute_t: estimate escaped the loose bracket");
    return out;
}

// Symmetric Gaussian matrix with entry variance (1+1_{i=j}) * s / N.
inline Eigen::MatrixXd gaussian_perturbation(int N, double s, Rng& g) {
    Eigen::MatrixXd W(N, N);
    const double off = std::sqrt(s / N), diag = std::sqrt(2.0 * s / N);
    for (int i = 0; i < N; ++i) {
        W(i, i) = diag * g.normal();
        for (int j = i + 1; j < N; ++j) {
            const double v = off * g.normal();
            W(i, j) = v;
            W(j, i) = v;
        }
    }
    return W;
}

inline Eigen::MatrixXd perturb(const Eigen::MatrixXd& X, double s, std::uint64_t seed) {
    if (s < 0.0) throw std::invalid_argument("perturb: s >= 0 required");
    if (s == 0.0) return X;
    Rng g(seed, "ensemble.perturb");
    return X + gaussian_perturbation(static_cast<int>(X.rows()), s, g);
}

// gamma * A + (B + C) + sqrt(1-gamma^2) * sqrt(t) * W along the comparison path.
inline Eigen::MatrixXd interpolate(double gamma, const DecomposedMatrix& parts,
                                   const PerturbTime& t, std::uint64_t seed) {
    if (!(gamma >= 0.0 && gamma <= 1.0)) throw std::invalid_argument("interpolate: gamma in [0,1]");
    Eigen::MatrixXd out = gamma * parts.A + parts.B + parts.C;
    const double s = (1.0 - gamma * gamma) * t.t;
    if (s > 0.0) {
        Rng g(seed, "ensemble.interp");
        out += gaussian_perturbation(static_cast<int>(out.rows()), s, g);
    }
    return out;
}

// --- dense matrix file format -----------------------------------------------
// magic "LEVM", u32 version=1, u64 N, then N*N float64 row-major, little-endian.

inline void write_matrix(const std::string& path, const Eigen::MatrixXd& M) {
    if (M.rows() != M.cols()) throw std::invalid_argument("write_matrix: square matrices only");
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("write_matrix: cannot open " + path);
    f.write("LEVM", 4);
    const std::uint32_t version = 1;
    f.write(reinterpret_cast<const char*>(&version), 4);
    const std::uint64_t n = static_cast<std::uint64_t>(M.rows());
    f.write(reinterpret_cast<const char*>(&n), 8);
    for (std::uint64_t i = 0; i < n; ++i)
        for (std::uint64_t j = 0; j < n; ++j) {
            const double v = M(static_cast<int>(i), static_cast<int>(j));
            f.write(reinterpret_cast<const char*>(&v), 8);
        }
    if (!f) throw std::runtime_error("write_matrix: short write to " + path);
}

inline Eigen::MatrixXd read_matrix(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("read_matrix: cannot open " + path);
    char magic[4];
    f.read(magic, 4);
    if (!f || std::string(magic, 4) != "LEVM")
        throw std::runtime_error("read_matrix: bad magic in " + path);
    std::uint32_t version = 0;
    f.read(reinterpret_cast<char*>(&version), 4);
    if (version != 1) throw std::runtime_error("read_matrix: unsupported version");
    std::uint64_t n = 0;
    f.read(reinterpret_cast<char*>(&n), 8);
    Eigen::MatrixXd M(static_cast<int>(n), static_cast<int>(n));
    for (std::uint64_t i = 0; i < n; ++i)
        for (std::uint64_t j = 0; j < n; ++j) {
            double v;
            f.read(reinterpret_cast<char*>(&v), 8);
            M(static_cast<int>(i), static_cast<int>(j)) = v;
        }
    if (!f) throw std::runtime_error("read_matrix: truncated file " + path);
    return M;
}

}  // namespace levylab
