#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "levylab/ensemble.hpp"

namespace levylab {

// Entry indices, eigenvector labels and particle sites are 1-based throughout
// the public API; eigenvalue k means the k-th smallest.

struct SpectralSample {
    Eigen::VectorXd eigenvalues;          // ascending
    std::map<int, Eigen::VectorXd> rows;  // entry index i -> (u_1(i), ..., u_N(i))
    EnsembleSpec spec;                    // meta; N may be 0 when not ensemble-built
    double s = 0.0;                       // perturbation time the matrix was taken at
    std::uint64_t seed = 0;

    int dim() const { return static_cast<int>(eigenvalues.size()); }
    const Eigen::VectorXd& row(int i) const {
        auto it = rows.find(i);
        if (it == rows.end()) throw std::out_of_range("SpectralSample: row not stored");
        return it->second;
    }
};

struct ParticleConfig {
    std::map<int, int> sites;  // site -> multiplicity >= 1
    int N = 0;

    void validate() const {
        for (auto [i, m] : sites) {
            if (m < 1) throw std::invalid_argument("ParticleConfig: multiplicities >= 1");
            if (i < 1 || i > N) throw std::invalid_argument("ParticleConfig: site outside [1,N]");
        }
    }
    int total() const {
        int t = 0;
        for (auto [i, m] : sites) t += m;
        return t;
    }
};

// Full symmetric eigendecomposition.  Sign convention: the largest-magnitude
// coordinate of each eigenvector is positive (first such index on ties).
inline SpectralSample eigh(const Eigen::MatrixXd& M, const std::set<int>& row_indices = {}) {
    const int N = static_cast<int>(M.rows());
    if (M.cols() != N) throw std::invalid_argument("eigh: square input required");
    const double scale = std::max(1.0, M.cwiseAbs().maxCoeff());
    if ((M - M.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
        throw std::invalid_argument("eigh: input not symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(M);
    if (solver.info() != Eigen::Success) throw std::runtime_error("eigh: failed to converge");

    SpectralSample out;
    out.eigenvalues = solver.eigenvalues();
    Eigen::MatrixXd U = solver.eigenvectors();
    for (int k = 0; k < N; ++k) {
        int arg = 0;
        double best = -1.0;
        for (int i = 0; i < N; ++i) {
            const double a = std::abs(U(i, k));
            if (a > best) {
                best = a;
                arg = i;
            }
        }
        if (U(arg, k) < 0) U.col(k) = -U.col(k);
    }
    for (int i : row_indices) {
        if (i < 1 || i > N) throw std::out_of_range("eigh: row index outside [1,N]");
        out.rows[i] = U.row(i - 1).transpose();
    }
    return out;
}

inline bool& resolvent_verification() {
#ifdef NDEBUG
    static bool on = false;
#else
    static bool on = true;
#endif
    return on;
}

// R_ij(z) = sum_k u_k(i) u_k(j) / (lambda_k - z) from a stored decomposition.
inline std::complex<double> resolvent_entry(const SpectralSample& sample, int i, int j,
                                            std::complex<double> z) {
    const auto& ri = sample.row(i);
    const auto& rj = sample.row(j);
    std::complex<double> acc{0.0, 0.0};
    for (int k = 0; k < sample.dim(); ++k) acc += ri[k] * rj[k] / (sample.eigenvalues[k] - z);
    return acc;
}

inline std::map<std::pair<int, int>, std::complex<double>>
resolvent(const Eigen::MatrixXd& M, std::complex<double> z,
          const std::vector<std::pair<int, int>>& pairs) {
    if (!(z.imag() > 0.0)) throw std::invalid_argument("resolvent: Im z > 0 required");
    std::set<int> rows;
    for (auto [i, j] : pairs) {
        rows.insert(i);
        rows.insert(j);
    }
    const SpectralSample sample = eigh(M, rows);
    std::map<std::pair<int, int>, std::complex<double>> out;
    for (auto [i, j] : pairs) out[{i, j}] = resolvent_entry(sample, i, j, z);

    if (resolvent_verification()) {
        // Ward identity per stored row: sum_j |R_ij|^2 = Im R_ii / eta, where the
        // left side collapses to sum_k u_k(i)^2/|lambda_k - z|^2 by orthogonality.
        const double eta = z.imag();
        for (int i : rows) {
            const auto& ri = sample.row(i);
            double lhs = 0.0;
            std::complex<double> rii{0.0, 0.0};
            for (int k = 0; k < sample.dim(); ++k) {
                const std::complex<double> d = sample.eigenvalues[k] - z;
                lhs += ri[k] * ri[k] / std::norm(d);
                rii += ri[k] * ri[k] / d;
            }
            const double rhs = rii.imag() / eta;
            if (std::abs(lhs - rhs) > 1e-9 * std::abs(rhs))
                throw std::runtime_error("resolvent: Ward identity violated");
            if (std::abs(rii) > 1.0 / eta * (1.0 + 1e-12))
                throw std::runtime_error("resolvent: |R_ii| exceeded 1/Im z");
        }
    }
    return out;
}

inline std::complex<double> stieltjes_from(const Eigen::VectorXd& eigenvalues,
                                           std::complex<double> z) {
    if (!(z.imag() > 0.0)) throw std::invalid_argument("stieltjes: Im z > 0 required");
    std::complex<double> acc{0.0, 0.0};
    for (int k = 0; k < eigenvalues.size(); ++k) acc += 1.0 / (eigenvalues[k] - z);
    return acc / static_cast<double>(eigenvalues.size());
}

inline std::complex<double> stieltjes(const Eigen::MatrixXd& M, std::complex<double> z) {
    if (!(z.imag() > 0.0)) throw std::invalid_argument("stieltjes: Im z > 0 required");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(M, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) throw std::runtime_error("stieltjes: eigensolve failed");
    return stieltjes_from(solver.eigenvalues(), z);
}

// gamma_i = smallest y with CDF(y) >= i/N, bisected to 1e-8.  Only the index
// window [i_lo, i_hi] is computed; heavy-tailed laws have no finite gamma_N.
inline std::vector<double> classical_locations(const std::function<double(double)>& cdf, int N,
                                               int i_lo = 1, int i_hi = 0) {
    if (i_hi == 0) i_hi = N;
    if (i_lo < 1 || i_hi > N || i_lo > i_hi)
        throw std::invalid_argument("classical_locations: bad index window");
    if (cdf(-1.0) > cdf(1.0) + 1e-15)
        throw std::invalid_argument("classical_locations: CDF not monotone");
    std::vector<double> out;
    out.reserve(i_hi - i_lo + 1);
    for (int i = i_lo; i <= i_hi; ++i) {
        const double q = static_cast<double>(i) / N;
        double lo = -1.0, hi = 1.0;
        while (cdf(lo) >= q && lo > -1e9) lo *= 2.0;
        while (cdf(hi) < q && hi < 1e9) hi *= 2.0;
        for (int it = 0; it < 200 && hi - lo > 1e-8; ++it) {
            const double mid = 0.5 * (lo + hi);
            (cdf(mid) >= q ? hi : lo) = mid;
        }
        out.push_back(hi);
    }
    return out;
}

// Quantiles of the replica-averaged empirical spectral CDF: with R replicas of
// N eigenvalues each, gamma_hat_i is the (R*i)-th smallest of the pooled R*N
// values (left-continuous step inversion).
inline std::vector<double> empirical_quantiles(const std::vector<Eigen::VectorXd>& ensemble) {
    if (ensemble.empty()) throw std::invalid_argument("empirical_quantiles: empty ensemble");
    const std::size_t R = ensemble.size();
    const std::size_t N = static_cast<std::size_t>(ensemble.front().size());
    std::vector<double> pooled;
    pooled.reserve(R * N);
    for (const auto& v : ensemble) {
        if (static_cast<std::size_t>(v.size()) != N)
            throw std::invalid_argument("empirical_quantiles: ragged ensemble");
        pooled.insert(pooled.end(), v.data(), v.data() + v.size());
    }
    std::sort(pooled.begin(), pooled.end());
    std::vector<double> out(N);
    for (std::size_t i = 1; i <= N; ++i) out[i - 1] = pooled[R * i - 1];
    return out;
}

// Normalised overlap product: prod_l z_{i_l}^{2 j_l} / prod_l (2 j_l - 1)!!
// with z_k = sqrt(N) <q, u_k>.
inline double overlap_observable(const SpectralSample& sample,
                                 const std::vector<std::pair<int, double>>& q,
                                 const ParticleConfig& xi) {
    xi.validate();
    double norm2 = 0.0;
    for (auto [i, c] : q) norm2 += c * c;
    if (std::abs(norm2 - 1.0) > 1e-12) throw std::invalid_argument("overlap_observable: q not unit");
    const double sqrtN = std::sqrt(static_cast<double>(sample.dim()));
    double out = 1.0;
    for (auto [k, j] : xi.sites) {
        if (k < 1 || k > sample.dim()) throw std::out_of_range("overlap_observable: site out of range");
        double zk = 0.0;
        for (auto [i, c] : q) zk += c * sample.row(i)[k - 1];
        zk *= sqrtN;
        double dfact = 1.0;  // (2j-1)!!
        for (int m = 3; m <= 2 * j - 1; m += 2) dfact *= m;
        out *= std::pow(zk, 2 * j) / dfact;
    }
    return out;
}

// C^2 smoothstep: identity on [0, M-1], constant M from M+1 on, quintic
// Hermite blend between (monotone; |f(x)-x| <= 1 on [0, M]).
inline double smooth_cutoff(double x, double M) {
    if (x <= M - 1.0) return x;
    if (x >= M + 1.0) return M;
    const double s = 0.5 * (x - (M - 1.0));
    return (M - 1.0) + 2.0 * s - 2.0 * s * s * s + s * s * s * s;
}

// Q_i = N^{-2} sum_{j != i} (lambda_j - lambda_i)^{-2}, smoothly capped at M.
inline double level_repulsion(const Eigen::VectorXd& eigenvalues, int i, double M) {
    const int N = static_cast<int>(eigenvalues.size());
    if (i < 1 || i > N) throw std::out_of_range("level_repulsion: index outside [1,N]");
    double q = 0.0;
    for (int j = 0; j < N; ++j) {
        if (j == i - 1) continue;
        const double gap = eigenvalues[j] - eigenvalues[i - 1];
        if (gap == 0.0) return M;  // degenerate pair saturates the cap
        q += 1.0 / (gap * gap);
    }
    q /= static_cast<double>(N) * N;
    return smooth_cutoff(q, M);
}

inline void write_spectrum_csv(const std::string& path, const Eigen::VectorXd& eigenvalues) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("write_spectrum_csv: cannot open " + path);
    f << "index,eigenvalue\n";
    char buf[64];
    for (int k = 0; k < eigenvalues.size(); ++k) {
        std::snprintf(buf, sizeof buf, "%d,%.17g\n", k + 1, eigenvalues[k]);
        f << buf;
    }
}

inline void write_overlap_csv(const std::string& path, const SpectralSample& sample,
                              const std::vector<int>& ks) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("write_overlap_csv: cannot open " + path);
    f << "k,i,N_u2\n";
    const double N = sample.dim();
    char buf[96];
    for (int k : ks)
        for (const auto& [i, r] : sample.rows) {
            std::snprintf(buf, sizeof buf, "%d,%d,%.17g\n", k, i, N * r[k - 1] * r[k - 1]);
            f << buf;
        }
}

}  // namespace levylab
