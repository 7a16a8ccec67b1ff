#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "levylab/config.hpp"
#include "levylab/emf.hpp"
#include "levylab/ensemble.hpp"
#include "levylab/limit_moments.hpp"
#include "levylab/rde.hpp"
#include "levylab/report.hpp"
#include "levylab/rng.hpp"
#include "levylab/spectral.hpp"

namespace levylab {

// --- deterministic replica pool ----------------------------------------------

template <class T>
struct ReplicaRun {
    std::vector<T> values;  // successful results, in replica-id order
    std::vector<int> failed;
    std::vector<std::string> errors;
};

// Runs fn(id) for id in [0, n) on `workers` threads.  Each job must derive its
// randomness from its id alone; results are merged in id order, so the output
// is byte-identical for any worker count or schedule.
template <class T, class Fn>
ReplicaRun<T> replica_map(int n, int workers, Fn&& fn) {
    if (n < 0) throw std::invalid_argument("replica_map: n >= 0 required");
    if (workers < 1) throw std::invalid_argument("replica_map: workers >= 1 required");
    std::vector<std::optional<T>> slots(static_cast<std::size_t>(n));
    std::vector<std::string> errs(static_cast<std::size_t>(n));
    std::atomic<int> next{0};
    auto work = [&]() {
        for (;;) {
            const int id = next.fetch_add(1);
            if (id >= n) return;
            try {
                slots[id] = fn(id);
            } catch (const std::exception& e) {
                errs[id] = e.what();
            } catch (...) {
                errs[id] = "unknown failure";
            }
        }
    };
    if (workers == 1 || n <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        const int count = std::min(workers, n);
        pool.reserve(static_cast<std::size_t>(count));
        for (int w = 0; w < count; ++w) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    ReplicaRun<T> out;
    for (int id = 0; id < n; ++id) {
        if (slots[id]) {
            out.values.push_back(std::move(*slots[id]));
        } else {
            out.failed.push_back(id);
            out.errors.push_back(errs[id]);
        }
    }
    return out;
}

// --- small statistical helpers -----------------------------------------------

struct MeanSe {
    double mean = 0.0;
    double se = 0.0;
};

inline MeanSe mean_se(const std::vector<double>& v) {
    if (v.empty()) throw std::invalid_argument("mean_se: empty sample");
    double s1 = 0.0, s2 = 0.0;
    for (double x : v) {
        s1 += x;
        s2 += x * x;
    }
    const double n = static_cast<double>(v.size());
    MeanSe out;
    out.mean = s1 / n;
    out.se = std::sqrt(std::max(s2 / n - out.mean * out.mean, 0.0) / n);
    return out;
}

// Sample variance with a delta-method standard error, Var(v^) ~ (m4 - V^2)/n.
struct VarSe {
    double var = 0.0;
    double se = 0.0;
};

inline VarSe var_se(const std::vector<double>& v) {
    if (v.size() < 2) throw std::invalid_argument("var_se: need at least two values");
    const double n = static_cast<double>(v.size());
    double s1 = 0.0;
    for (double x : v) s1 += x;
    const double mean = s1 / n;
    double s2 = 0.0, s4 = 0.0;
    for (double x : v) {
        const double d = x - mean;
        s2 += d * d;
        s4 += d * d * d * d;
    }
    VarSe out;
    out.var = s2 / n;
    out.se = std::sqrt(std::max(s4 / n - out.var * out.var, 0.0) / n);
    return out;
}

// Two-sample Kolmogorov-Smirnov distance, sup over the pooled jump points.
inline double ks_distance(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("ks_distance: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] == x) ++i;
        while (j < b.size() && b[j] == x) ++j;
        d = std::max(d, std::abs(i / na - j / nb));
    }
    return d;
}

// --- flatness statistic ------------------------------------------------------

// (N/|a|) sum_i a_i u_k(i)^2 for a signed probe with weights in [-1,1] summing
// to zero; measures how evenly the eigenvector spreads over the probe support.
inline double que_statistic(const SpectralSample& sample, int k,
                            const std::map<int, double>& probe) {
    const int N = sample.dim();
    if (k < 1 || k > N) throw std::out_of_range("que_statistic: k outside [1,N]");
    if (probe.empty()) throw std::invalid_argument("que_statistic: empty probe");
    double sum = 0.0, stat = 0.0;
    for (auto [i, w] : probe) {
        if (i < 1 || i > N) throw std::invalid_argument("que_statistic: site outside [1,N]");
        if (w == 0.0 || std::abs(w) > 1.0)
            throw std::invalid_argument("que_statistic: weights must be nonzero in [-1,1]");
        sum += w;
        const double u = sample.row(i)[k - 1];
        stat += w * u * u;
    }
    if (std::abs(sum) > 1e-12)
        throw std::invalid_argument("que_statistic: probe weights must sum to zero");
    return stat * static_cast<double>(N) / static_cast<double>(probe.size());
}

// +1, -1, +1, ... on sites 1..support: the canonical zero-sum probe.
inline std::map<int, double> alternating_probe(int support) {
    if (support < 2 || support % 2 != 0)
        throw std::invalid_argument("alternating_probe: even support >= 2 required");
    std::map<int, double> a;
    for (int i = 1; i <= support; ++i) a[i] = (i % 2 == 1) ? 1.0 : -1.0;
    return a;
}

// --- replica samplers --------------------------------------------------------

// Per-replica reductions at the centre of the spectrum.  Everything the
// statistical experiments need from one matrix is computed here in one
// decomposition pass and returned as a handful of doubles.
struct CentralObservables {
    double nu2_1 = 0.0;  // N u_k(1)^2 at the centre index k
    double nu2_2 = 0.0;
    double same_panel = 0.0;     // panel mean of (N u_v(1)^2 - 1)(N u_v(2)^2 - 1)
    double neigh_panel_1 = 0.0;  // panel mean of (N u_v(1)^2 - 1)(N u_{v+1}(1)^2 - 1)
    double neigh_panel_2 = 0.0;  //   same with entry 2
    double que10 = 0.0, que40 = 0.0, que160 = 0.0;
};

struct CentralOptions {
    int k = 0;  // centre index; 0 resolves to N/2
    bool with_panels = false;
    bool with_que = false;
};

inline CentralObservables central_replica(double alpha, int N, std::uint64_t master, int replica,
                                          const CentralOptions& opt = {}) {
    const EnsembleSpec spec =
        make_spec(alpha, N, derive_key(master, "lab.H", static_cast<std::uint64_t>(replica)));
    const Eigen::MatrixXd H = build_levy(spec);
    std::set<int> rows{1, 2};
    if (opt.with_que) {
        if (N < 160) throw std::invalid_argument("central_replica: flatness probes need N >= 160");
        for (int i = 1; i <= 160; ++i) rows.insert(i);
    }
    const SpectralSample s = eigh(H, rows);
    const int k = opt.k > 0 ? opt.k : N / 2;
    if (k < 1 || k > N) throw std::invalid_argument("central_replica: centre index outside [1,N]");

    const auto nu2 = [&](int entry, int vec) {
        const double u = s.row(entry)[vec - 1];
        return N * u * u;
    };
    CentralObservables out;
    out.nu2_1 = nu2(1, k);
    out.nu2_2 = nu2(2, k);

    if (opt.with_panels) {
        // 40 consecutive central vectors; each covariance pairs indices at
        // distance <= 1, and centring at the limit mean 1 keeps the panel
        // estimate bias second-order.
        const int k0 = k - 20;
        if (k0 < 1 || k0 + 39 > N)
            throw std::invalid_argument("central_replica: covariance panel leaves [1,N]");
        double same = 0.0;
        for (int v = k0; v < k0 + 40; ++v) same += (nu2(1, v) - 1.0) * (nu2(2, v) - 1.0);
        out.same_panel = same / 40.0;
        double n1 = 0.0, n2 = 0.0;
        for (int j = 0; j < 20; ++j) {
            const int v = k0 + 2 * j;
            n1 += (nu2(1, v) - 1.0) * (nu2(1, v + 1) - 1.0);
            n2 += (nu2(2, v) - 1.0) * (nu2(2, v + 1) - 1.0);
        }
        out.neigh_panel_1 = n1 / 20.0;
        out.neigh_panel_2 = n2 / 20.0;
    }
    if (opt.with_que) {
        out.que10 = que_statistic(s, k, alternating_probe(10));
        out.que40 = que_statistic(s, k, alternating_probe(40));
        out.que160 = que_statistic(s, k, alternating_probe(160));
    }
    return out;
}

// Replica of the perturbed ensemble: heavy-tailed matrix with its small
// entries removed, plus an independent Gaussian of variance t.  These samples
// feed both sides of the dynamics comparison.
inline SpectralSample dynamics_replica(double alpha, int N, double t, std::uint64_t master,
                                       int replica, const std::set<int>& rows) {
    const EnsembleSpec spec =
        make_spec(alpha, N, derive_key(master, "lab.dynH", static_cast<std::uint64_t>(replica)));
    const Eigen::MatrixXd H = build_levy(spec);
    const DecomposedMatrix parts = decompose(H, spec);
    const Eigen::MatrixXd Xt =
        perturb(parts.B + parts.C, t,
                derive_key(master, "lab.dynW", static_cast<std::uint64_t>(replica)));
    return eigh(Xt, rows);
}

// --- experiment drivers ------------------------------------------------------

namespace detail {

inline void note_failures(const char* who, const std::vector<int>& failed,
                          const std::vector<std::string>& errors) {
    for (std::size_t i = 0; i < failed.size(); ++i)
        std::fprintf(stderr, "%s: replica %d failed: %s\n", who, failed[i], errors[i].c_str());
}

inline int require_enough(const char* who, std::size_t usable) {
    if (usable < 100)
        throw std::runtime_error(std::string(who) + ": fewer than 100 usable replicas");
    return static_cast<int>(usable);
}

}  // namespace detail

// Moments of N u_k(1)^2 at the centre against the closed-form targets, plus a
// two-sample KS test against the sampled limit law when the distributional
// statement applies (alpha strictly between 1 and 2).
inline MomentReport verify_median(const ExperimentConfig& cfg) {
    const double alpha = cfg.alpha();
    const int N = cfg.n();
    const int R = cfg.replicas();
    if (R < 100) throw std::invalid_argument("verify_median: at least 100 replicas required");
    select_parameters(alpha);  // rejects invalid alpha before any work
    const std::uint64_t seed = cfg.seed();
    const int pmax = static_cast<int>(cfg.integer_or("observable.p_max", 3));
    if (pmax < 1 || pmax > 6)
        throw std::invalid_argument("verify_median: observable.p_max in [1,6]");

    CentralOptions opt;
    opt.k = cfg.site_index();
    auto run = replica_map<CentralObservables>(
        R, cfg.workers(), [&](int r) { return central_replica(alpha, N, seed, r, opt); });
    detail::note_failures("verify_median", run.failed, run.errors);

    MomentReport rep;
    rep.experiment = "median";
    rep.alpha = alpha;
    rep.n = N;
    rep.seed = seed;
    rep.failed_replicas = static_cast<int>(run.failed.size());
    rep.replicas = detail::require_enough("verify_median", run.values.size());
    rep.scalars["k"] = opt.k;

    std::vector<double> v;
    v.reserve(run.values.size());
    for (const auto& o : run.values) v.push_back(o.nu2_1);
    rep.series["nu2"] = v;

    for (int p = 1; p <= pmax; ++p) {
        std::vector<double> powed(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) powed[i] = std::pow(v[i], p);
        const MeanSe m = mean_se(powed);
        const double theory = median_moment(alpha, p);
        // finite-size allowances: absolute at p = 1, relative above
        const double allowance = p == 1 ? 0.05 : (p == 2 ? 0.08 : 0.15) * theory;
        rep.rows.push_back(make_row("E[(N u_k(1)^2)^" + std::to_string(p) + "]", theory, m.mean,
                                    m.se, allowance,
                                    "closed form: double factorial x inverse-stable moment"));
    }

    if (alpha > 1.0 && alpha < 2.0) {
        const std::size_t m = 20000;
        const std::vector<double> u = sample_ustar0(alpha, m, derive_key(seed, "lab.ks"));
        Rng zr(seed, "lab.ksz");
        std::vector<double> oracle(m);
        for (std::size_t i = 0; i < m; ++i) {
            const double z = zr.normal();
            oracle[i] = z * z * u[i];
        }
        const double d = ks_distance(v, oracle);
        const double crit =
            1.628 * std::sqrt((static_cast<double>(v.size()) + m) / (v.size() * double(m)));
        const double threshold = std::max(crit, 0.05);
        ReportRow row;
        row.label = "KS distance to sampled limit law";
        row.theory = 0.0;
        row.estimate = d;
        row.se = 0.0;
        row.allowance = threshold;
        row.basis = "two-sample KS vs squared-Gaussian x inverse-stable draws; "
                    "threshold = max(1% critical value, 0.05)";
        row.pass = d <= threshold;
        rep.rows.push_back(row);
        rep.scalars["ks_distance"] = d;
        rep.scalars["ks_crit_1pct"] = crit;
        rep.series["limit_draws"] = oracle;
    }
    return rep;
}

// Covariance structure across entries and across neighbouring eigenvectors,
// panel-averaged over 40 central vectors.
inline MomentReport verify_joint(const ExperimentConfig& cfg) {
    const double alpha = cfg.alpha();
    const int N = cfg.n();
    const int R = cfg.replicas();
    if (R < 100) throw std::invalid_argument("verify_joint: at least 100 replicas required");
    select_parameters(alpha);
    const std::uint64_t seed = cfg.seed();

    CentralOptions opt;
    opt.k = cfg.site_index();
    opt.with_panels = true;
    auto run = replica_map<CentralObservables>(
        R, cfg.workers(), [&](int r) { return central_replica(alpha, N, seed, r, opt); });
    detail::note_failures("verify_joint", run.failed, run.errors);

    MomentReport rep;
    rep.experiment = "joint";
    rep.alpha = alpha;
    rep.n = N;
    rep.seed = seed;
    rep.failed_replicas = static_cast<int>(run.failed.size());
    rep.replicas = detail::require_enough("verify_joint", run.values.size());
    rep.scalars["k"] = opt.k;
    rep.scalars["panel_vectors"] = 40;

    std::vector<double> same, n1, n2;
    for (const auto& o : run.values) {
        same.push_back(o.same_panel);
        n1.push_back(o.neigh_panel_1);
        n2.push_back(o.neigh_panel_2);
    }
    rep.series["same_vector_panel"] = same;
    rep.series["neighbor_panel_entry1"] = n1;
    rep.series["neighbor_panel_entry2"] = n2;

    const JointPredictions pred = joint_predictions(alpha);
    const MeanSe ms = mean_se(same);
    rep.rows.push_back(make_row("Cov(N u_k(1)^2, N u_k(2)^2)", pred.same_vector_cov, ms.mean,
                                ms.se, 0.0, "independent limit factors for distinct entries"));
    const MeanSe m1 = mean_se(n1);
    rep.rows.push_back(make_row("Cov(N u_k(1)^2, N u_{k+1}(1)^2)", pred.neighbor_cov, m1.mean,
                                m1.se, 0.15 * std::abs(pred.neighbor_cov),
                                "shared scale factor: second minus squared first moment"));
    const MeanSe m2 = mean_se(n2);
    ReportRow swap;
    swap.label = "neighbour covariance, entry 1 vs entry 2";
    swap.theory = 0.0;
    swap.estimate = m1.mean - m2.mean;
    swap.se = m1.se + m2.se;  // bound for correlated estimates
    swap.allowance = 0.0;
    swap.basis = "exchangeability of matrix entries";
    swap.pass = std::abs(swap.estimate) <= 3.0 * swap.se;
    rep.rows.push_back(swap);
    return rep;
}

// Overlap observable under the Gaussian flow against the resolvent-ratio
// prediction, for three small particle configurations plus controls.
inline MomentReport verify_dynamics(const ExperimentConfig& cfg) {
    const double alpha = cfg.alpha();
    const int N = cfg.n();
    const int R = cfg.replicas();
    if (R < 100) throw std::invalid_argument("verify_dynamics: at least 100 replicas required");
    const EnsembleSpec base = select_parameters(alpha);
    const std::uint64_t seed = cfg.seed();
    const int k = cfg.site_index();

    const PerturbTime t =
        compute_t(make_spec(alpha, N, derive_key(seed, "lab.t")), 400000);
    const double eta = flow_eta(base.frak_a, N);

    auto run = replica_map<SpectralSample>(R, cfg.workers(), [&](int r) {
        return dynamics_replica(alpha, N, t.t, seed, r, {1});
    });
    detail::note_failures("verify_dynamics", run.failed, run.errors);

    MomentReport rep;
    rep.experiment = "dynamics";
    rep.alpha = alpha;
    rep.n = N;
    rep.seed = seed;
    rep.failed_replicas = static_cast<int>(run.failed.size());
    rep.replicas = detail::require_enough("verify_dynamics", run.values.size());
    rep.scalars["t"] = t.t;
    rep.scalars["eta"] = eta;
    rep.scalars["k"] = k;

    const std::vector<std::pair<int, double>> q{{1, 1.0}};
    const FEstimate empty_f = estimate_F(run.values, q, ParticleConfig{{}, N});
    const FEstimate empty_r = theory_rhs(run.values, alpha, q, ParticleConfig{{}, N}, eta);
    rep.rows.push_back(make_row("empty config: F", 1.0, empty_f.mean, empty_f.se, 0.0,
                                "product over an empty set"));
    rep.rows.push_back(make_row("empty config: prediction", 1.0, empty_r.mean, empty_r.se, 0.0,
                                "product over an empty set"));

    const std::vector<std::pair<std::string, ParticleConfig>> configs{
        {"one particle at k", ParticleConfig{{{k, 1}}, N}},
        {"two particles at k", ParticleConfig{{{k, 2}}, N}},
        {"particles at k and k+1", ParticleConfig{{{k, 1}, {k + 1, 1}}, N}},
    };
    for (const auto& [label, xi] : configs) {
        const FEstimate f = estimate_F(run.values, q, xi);
        const FEstimate r = theory_rhs(run.values, alpha, q, xi, eta);
        rep.rows.push_back(make_row(label + ": F vs prediction", r.mean, f.mean,
                                    std::sqrt(f.se * f.se + r.se * r.se), 0.1,
                                    "resolvent-ratio replica average at resolution eta"));
        rep.scalars["F[" + label + "]"] = f.mean;
        rep.scalars["rhs[" + label + "]"] = r.mean;
    }

    // rotation-invariant control: pure Gaussian start, overlaps exactly
    // calibrated to 1 in the large-N limit
    auto goe = replica_map<SpectralSample>(R, cfg.workers(), [&](int r) {
        const Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(N, N);
        return eigh(evolve_dbm(zero, 1.0, 1, derive_key(seed, "lab.goe", r)).at_end(), {1});
    });
    detail::note_failures("verify_dynamics[control]", goe.failed, goe.errors);
    const FEstimate fg = estimate_F(goe.values, q, ParticleConfig{{{k, 1}}, N});
    rep.rows.push_back(make_row("control ensemble: F", 1.0, fg.mean, fg.se, 0.05,
                                "rotation-invariant ensemble calibration"));
    return rep;
}

// Variance of the zero-sum flatness statistic across probe supports 10/40/160:
// the spread must shrink as the probe widens.
inline MomentReport que_check(const ExperimentConfig& cfg) {
    const double alpha = cfg.alpha();
    const int N = cfg.n();
    const int R = cfg.replicas();
    if (R < 100) throw std::invalid_argument("que_check: at least 100 replicas required");
    select_parameters(alpha);
    const std::uint64_t seed = cfg.seed();

    CentralOptions opt;
    opt.k = cfg.site_index();
    opt.with_que = true;
    auto run = replica_map<CentralObservables>(
        R, cfg.workers(), [&](int r) { return central_replica(alpha, N, seed, r, opt); });
    detail::note_failures("que_check", run.failed, run.errors);

    MomentReport rep;
    rep.experiment = "que";
    rep.alpha = alpha;
    rep.n = N;
    rep.seed = seed;
    rep.failed_replicas = static_cast<int>(run.failed.size());
    rep.replicas = detail::require_enough("que_check", run.values.size());
    rep.scalars["k"] = opt.k;

    std::map<int, std::vector<double>> stats;
    for (const auto& o : run.values) {
        stats[10].push_back(o.que10);
        stats[40].push_back(o.que40);
        stats[160].push_back(o.que160);
    }
    for (auto& [s, vals] : stats) rep.series["que" + std::to_string(s)] = vals;

    const MeanSe m10 = mean_se(stats.at(10));
    rep.rows.push_back(make_row("mean statistic, support 10", 0.0, m10.mean, m10.se, 0.0,
                                "zero-sum probe against exchangeable entries"));

    std::map<int, VarSe> vars;
    for (const auto& [s, vals] : stats) {
        vars[s] = var_se(vals);
        rep.scalars["var" + std::to_string(s)] = vars[s].var;
        rep.scalars["var" + std::to_string(s) + "_se"] = vars[s].se;
    }
    const auto drop_row = [&](int a, int b) {
        const double diff = vars.at(a).var - vars.at(b).var;
        const double se = std::sqrt(vars.at(a).se * vars.at(a).se + vars.at(b).se * vars.at(b).se);
        ReportRow row;
        row.label = "variance drop, support " + std::to_string(a) + " to " + std::to_string(b);
        row.theory = 0.0;
        row.estimate = diff;
        row.se = se;
        row.allowance = 0.0;
        row.basis = "second-moment bound: constant plus inverse support size";
        row.pass = diff > 3.0 * se;  // one-sided: must strictly decrease
        rep.rows.push_back(row);
    };
    drop_row(10, 40);
    drop_row(40, 160);
    return rep;
}

// --- artifact emission and dispatch ------------------------------------------

inline void write_report_artifacts(const MomentReport& rep, const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    write_report_json(out_dir + "/report.json", rep);
    write_rows_csv(out_dir + "/rows.csv", rep);
    for (const auto& [name, vals] : rep.series)
        write_series_csv(out_dir + "/" + name + ".csv", name, vals);
    const auto nu2 = rep.series.find("nu2");
    if (nu2 != rep.series.end()) {
        const auto overlay = rep.series.find("limit_draws");
        write_histogram_svg(out_dir + "/nu2_hist.svg", nu2->second,
                            overlay == rep.series.end() ? std::vector<double>{}
                                                        : overlay->second,
                            60, 0.0, 8.0, "centre eigenvector entry: N u_k(1)^2",
                            "N u^2");
    }
}

inline MomentReport dispatch_experiment(const ExperimentConfig& cfg) {
    const std::string& name = cfg.experiment();
    if (name == "median") return verify_median(cfg);
    if (name == "joint") return verify_joint(cfg);
    if (name == "dynamics") return verify_dynamics(cfg);
    if (name == "que") return que_check(cfg);
    throw std::invalid_argument("run: unknown experiment '" + name + "'");
}

// Full run: dispatch, emit artifacts, return a shell-style exit code.
inline int run_experiment(const ExperimentConfig& cfg) {
    const MomentReport rep = dispatch_experiment(cfg);
    write_report_artifacts(rep, cfg.out_dir());
    if (rep.failed_replicas > 0)
        std::fprintf(stderr, "run: %d replicas failed and were excluded\n", rep.failed_replicas);
    return rep.pass() ? 0 : 1;
}

inline int run_experiment_file(const std::string& config_path) {
    return run_experiment(ExperimentConfig::from_file(config_path));
}

}  // namespace levylab
