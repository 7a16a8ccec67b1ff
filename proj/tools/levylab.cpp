// Command-line front end for the heavy-tailed random matrix laboratory.

#include "CLI11.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "levylab/lab.hpp"

namespace {

using namespace levylab;

std::uint64_t g_seed = 1;
int g_workers = 1;
std::string g_out_dir = "out";

double quantile(std::vector<double> v, double p) {
    std::sort(v.begin(), v.end());
    const double idx = p * (static_cast<double>(v.size()) - 1.0);
    const std::size_t lo = static_cast<std::size_t>(idx);
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    const double w = idx - static_cast<double>(lo);
    return (1.0 - w) * v[lo] + w * v[hi];
}

void write_value_csv(const std::string& path, const std::string& header,
                     const std::vector<double>& values) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path);
    f << "index," << header << "\n";
    char buf[64];
    for (std::size_t i = 0; i < values.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%zu,%.17g\n", i, values[i]);
        f << buf;
    }
}

// site token: "k" (centre), "k+d"/"k-d", or an absolute 1-based index
int parse_site(const std::string& tok, int N) {
    int site = 0;
    if (!tok.empty() && tok[0] == 'k') {
        site = N / 2;
        if (tok.size() > 1) site += std::stoi(tok.substr(1));
    } else {
        site = std::stoi(tok);
    }
    if (site < 1 || site > N) throw std::invalid_argument("site '" + tok + "' outside [1,N]");
    return site;
}

ParticleConfig parse_xi(const std::string& text, int N) {
    ParticleConfig xi;
    xi.N = N;
    std::string tok;
    std::istringstream in(text);
    while (std::getline(in, tok, ',')) {
        if (tok.empty()) continue;
        const auto colon = tok.find(':');
        const std::string site = tok.substr(0, colon);
        const int mult = colon == std::string::npos ? 1 : std::stoi(tok.substr(colon + 1));
        xi.sites[parse_site(site, N)] += mult;
    }
    xi.validate();
    return xi;
}

std::vector<std::pair<int, double>> parse_direction(const std::string& text, int N) {
    std::vector<std::pair<int, double>> q;
    std::string tok;
    std::istringstream in(text);
    while (std::getline(in, tok, ',')) {
        if (!tok.empty()) q.emplace_back(parse_site(tok, N), 1.0);
    }
    if (q.empty()) throw std::invalid_argument("direction needs at least one entry");
    const double norm = 1.0 / std::sqrt(static_cast<double>(q.size()));
    for (auto& [i, w] : q) w = norm;
    return q;
}

std::vector<int> parse_rows(const std::string& text) {
    std::vector<int> rows;
    std::string tok;
    std::istringstream in(text);
    while (std::getline(in, tok, ',')) {
        if (!tok.empty()) rows.push_back(std::stoi(tok));
    }
    return rows;
}

ExperimentConfig flags_config(const std::string& experiment, double alpha, int N, int replicas,
                              const std::string& k) {
    ExperimentConfig cfg;
    cfg.kv["experiment"] = experiment;
    cfg.kv["ensemble.alpha"] = std::to_string(alpha);
    cfg.kv["ensemble.n"] = std::to_string(N);
    cfg.kv["ensemble.replicas"] = std::to_string(replicas);
    cfg.kv["run.seed"] = std::to_string(g_seed);
    cfg.kv["run.workers"] = std::to_string(g_workers);
    cfg.kv["run.out_dir"] = g_out_dir;
    cfg.kv["observable.k"] = k;
    return cfg;
}

// --- subcommand bodies -------------------------------------------------------

int cmd_stable(double alpha, double beta, double scale, bool one_sided, bool entry, int N,
               std::size_t n, const std::string& out) {
    StableLaw law{alpha, beta, scale};
    if (one_sided) law = StableLaw{alpha, 1.0, one_sided_unit_scale(alpha)};
    std::vector<double> x;
    if (entry) {
        if (N < 2) throw std::invalid_argument("stable: --matrix-n required with --entry");
        x = sample_entry(alpha, static_cast<std::size_t>(N), n, g_seed);
    } else {
        x = sample_stable(law, n, g_seed);
    }
    if (!out.empty()) write_value_csv(out, "draw", x);
    std::printf("draws      %zu\n", x.size());
    std::printf("median     %.6g\n", quantile(x, 0.5));
    std::printf("iqr        [%.6g, %.6g]\n", quantile(x, 0.25), quantile(x, 0.75));
    std::printf("q95        %.6g\n", quantile(x, 0.95));
    return 0;
}

int cmd_matrix_build(double alpha, int N, const std::string& out) {
    const EnsembleSpec spec = make_spec(alpha, N, g_seed);
    write_matrix(out, build_levy(spec));
    std::printf("wrote %s  (N=%d, alpha=%g, nu=%g, a=%g, rho=%g)\n", out.c_str(), N, alpha,
                spec.nu, spec.frak_a, spec.rho);
    return 0;
}

int cmd_matrix_decompose(const std::string& in, double alpha, const std::string& prefix) {
    const Eigen::MatrixXd H = read_matrix(in);
    const EnsembleSpec spec = make_spec(alpha, static_cast<int>(H.rows()), g_seed);
    const DecomposedMatrix parts = decompose(H, spec);
    write_matrix(prefix + "_small.levm", parts.A);
    write_matrix(prefix + "_middle.levm", parts.B);
    write_matrix(prefix + "_large.levm", parts.C);
    const auto nnz = [](const Eigen::MatrixXd& M) {
        return (M.array() != 0.0).count();
    };
    std::printf("small entries  %ld\nmiddle entries %ld\nlarge entries  %ld\n", nnz(parts.A),
                nnz(parts.B), nnz(parts.C));
    return 0;
}

int cmd_matrix_perturb(const std::string& in, double s, const std::string& out) {
    write_matrix(out, perturb(read_matrix(in), s, g_seed));
    std::printf("wrote %s  (s=%g)\n", out.c_str(), s);
    return 0;
}

int cmd_matrix_interpolate(const std::string& in, double alpha, double gamma, std::size_t mc,
                           const std::string& out) {
    const Eigen::MatrixXd H = read_matrix(in);
    const EnsembleSpec spec = make_spec(alpha, static_cast<int>(H.rows()), g_seed);
    const DecomposedMatrix parts = decompose(H, spec);
    const PerturbTime t = compute_t(spec, mc);
    write_matrix(out, interpolate(gamma, parts, t, g_seed));
    std::printf("wrote %s  (gamma=%g, t=%.6g +- %.2g)\n", out.c_str(), gamma, t.t,
                t.estimator_se);
    return 0;
}

int cmd_matrix_eig(const std::string& in, const std::string& out, const std::string& rows_text,
                   const std::string& rows_out) {
    const Eigen::MatrixXd M = read_matrix(in);
    std::set<int> rows;
    for (int r : parse_rows(rows_text)) rows.insert(r);
    const SpectralSample s = eigh(M, rows);
    if (!out.empty()) write_spectrum_csv(out, s.eigenvalues);
    if (!rows.empty() && !rows_out.empty()) {
        std::vector<int> ks(s.dim());
        for (int k = 1; k <= s.dim(); ++k) ks[k - 1] = k;
        write_overlap_csv(rows_out, s, ks);
    }
    std::printf("N          %d\n", s.dim());
    std::printf("lambda_min %.9g\n", s.eigenvalues[0]);
    std::printf("lambda_max %.9g\n", s.eigenvalues[s.dim() - 1]);
    return 0;
}

int cmd_rde_solve(double alpha, double re, double im, std::size_t pool, int gens) {
    const Population pop = solve_rde(alpha, {re, im}, pool, gens, -1.0, g_seed);
    const MomentEstimate m1 = pool_im_moment(pop, 1);
    const MomentEstimate m2 = pool_im_moment(pop, 2);
    std::printf("pool       %zu (converged=%d)\n", pop.pool.size(), pop.converged ? 1 : 0);
    std::printf("E[Im R]    %.6g +- %.2g\n", m1.value, m1.se);
    std::printf("E[(Im R)^2] %.6g +- %.2g\n", m2.value, m2.se);
    const cplx m = solve_m_alpha(alpha, {re, im});
    std::printf("m(z)       %.6g%+.6gi  (fixed-point transform)\n", m.real(), m.imag());
    return 0;
}

int cmd_rde_mstar(double alpha, double re, double im) {
    const cplx m = solve_m_alpha(alpha, {re, im});
    std::printf("m(z)   %.9g%+.9gi\n", m.real(), m.imag());
    std::printf("rho    %.9g\n", m.imag() / M_PI);
    return 0;
}

int cmd_rde_density(double alpha, double lo, double hi, int points, const std::string& backend,
                    const std::string& out) {
    if (points < 2) throw std::invalid_argument("rde density: --points >= 2");
    std::vector<double> grid(points);
    for (int i = 0; i < points; ++i) grid[i] = lo + (hi - lo) * i / (points - 1);
    const DensityBackend b = backend == "pool" ? DensityBackend::pool : DensityBackend::quadrature;
    const DensityResult d = density(alpha, grid, b, {0.05, 0.025, 0.0125}, 30000, 60, g_seed);
    std::ofstream f(out);
    if (!f) throw std::runtime_error("cannot open " + out);
    f << "energy,rho\n";
    char buf[80];
    for (std::size_t i = 0; i < d.energy.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", d.energy[i], d.rho[i]);
        f << buf;
    }
    std::printf("wrote %s  (%d points, backend=%s)\n", out.c_str(), points, backend.c_str());
    return 0;
}

int cmd_moments_limit(double alpha, double E, int pmax, const std::string& out) {
    std::vector<MomentRow> rows;
    if (E == 0.0) {
        const int n = 65;
        std::vector<double> th(n);
        std::vector<cplx> v(n);
        for (int k = 0; k < n; ++k) {
            th[k] = 0.5 * M_PI * k / (n - 1);
            v[k] = zero_energy_gamma(alpha, th[k]);
        }
        rows = limit_moment_table(alpha, E, OrderParameterCurve(std::move(th), std::move(v)), pmax);
    } else {
        std::fprintf(stderr, "moments: running the population ladder at E=%g, this takes a while\n", E);
        const std::vector<cplx> u = make_quarter_grid(65);
        const std::vector<double> etas =
            alpha > 1.0 ? std::vector<double>{0.1, 0.05, 0.025, 0.0125}
                        : std::vector<double>{0.05, 0.025, 0.0125, 0.00625};
        const GammaStarResult g = gamma_star_at_real_E(alpha, E, etas, u, 20000, 150,
                                                       default_ppp_cutoff(alpha, 1e-2), g_seed,
                                                       /*averaging_generations=*/40);
        std::vector<double> th(u.size());
        for (std::size_t k = 0; k < u.size(); ++k) th[k] = std::arg(u[k]);
        th.front() = 0.0;
        th.back() = 0.5 * M_PI;
        rows = limit_moment_table(alpha, E, smoothed_order_parameter_curve(alpha, th, g.extrapolated),
                                  pmax);
    }
    std::ofstream f;
    if (!out.empty()) {
        f.open(out);
        if (!f) throw std::runtime_error("cannot open " + out);
        f << "label,p,theory,method\n";
    }
    for (const auto& r : rows) {
        std::printf("%-22s p=%d  %.12g  [%s]\n", r.label.c_str(), r.p, r.theory,
                    r.method.c_str());
        if (f) {
            char buf[160];
            std::snprintf(buf, sizeof buf, "%s,%d,%.17g,%s\n", r.label.c_str(), r.p, r.theory,
                          r.method.c_str());
            f << buf;
        }
    }
    return 0;
}

int cmd_emf_run(double alpha, int N, int replicas, const std::string& xi_text,
                const std::string& q_text) {
    const ParticleConfig xi = parse_xi(xi_text, N);
    const std::vector<std::pair<int, double>> q = parse_direction(q_text, N);
    std::set<int> rows;
    for (const auto& [i, w] : q) rows.insert(i);
    const EnsembleSpec base = select_parameters(alpha);
    const PerturbTime t = compute_t(make_spec(alpha, N, derive_key(g_seed, "lab.t")), 400000);
    const double eta = flow_eta(base.frak_a, N);

    auto run = replica_map<SpectralSample>(replicas, g_workers, [&](int r) {
        return dynamics_replica(alpha, N, t.t, g_seed, r, rows);
    });
    detail::note_failures("emf run", run.failed, run.errors);

    MomentReport rep;
    rep.experiment = "emf";
    rep.alpha = alpha;
    rep.n = N;
    rep.seed = g_seed;
    rep.failed_replicas = static_cast<int>(run.failed.size());
    rep.replicas = static_cast<int>(run.values.size());
    rep.scalars["t"] = t.t;
    rep.scalars["eta"] = eta;
    const FEstimate f = estimate_F(run.values, q, xi);
    const FEstimate rhs = theory_rhs(run.values, alpha, q, xi, eta);
    rep.rows.push_back(make_row("overlap observable vs prediction", rhs.mean, f.mean,
                                std::sqrt(f.se * f.se + rhs.se * rhs.se), 0.1,
                                "resolvent-ratio replica average at resolution eta"));
    write_report_artifacts(rep, g_out_dir);
    std::printf("F          %.6g +- %.2g\n", f.mean, f.se);
    std::printf("prediction %.6g +- %.2g\n", rhs.mean, rhs.se);
    std::printf("report     %s/report.json\n", g_out_dir.c_str());
    return rep.pass() ? 0 : 1;
}

int cmd_que(double alpha, int N, int support, int replicas, const std::string& out) {
    const std::map<int, double> probe = alternating_probe(support);
    auto run = replica_map<double>(replicas, g_workers, [&](int r) {
        const EnsembleSpec spec =
            make_spec(alpha, N, derive_key(g_seed, "lab.H", static_cast<std::uint64_t>(r)));
        std::set<int> rows;
        for (int i = 1; i <= support; ++i) rows.insert(i);
        const SpectralSample s = eigh(build_levy(spec), rows);
        return que_statistic(s, N / 2, probe);
    });
    detail::note_failures("que", run.failed, run.errors);
    if (run.values.size() < 2) throw std::runtime_error("que: too few usable replicas");
    if (!out.empty()) write_value_csv(out, "statistic", run.values);
    const MeanSe m = mean_se(run.values);
    const VarSe v = var_se(run.values);
    std::printf("replicas   %zu (failed %zu)\n", run.values.size(), run.failed.size());
    std::printf("mean       %.6g +- %.2g\n", m.mean, m.se);
    std::printf("variance   %.6g +- %.2g\n", v.var, v.se);
    return 0;
}

void print_report(const MomentReport& rep) {
    for (const auto& r : rep.rows)
        std::printf("%-44s theory %11.5g  est %11.5g +- %-9.3g %s\n", r.label.c_str(), r.theory,
                    r.estimate, r.se, r.pass ? "ok" : "FAIL");
    std::printf("%s: %s (%d replicas, %d failed)\n", rep.experiment.c_str(),
                rep.pass() ? "PASS" : "FAIL", rep.replicas, rep.failed_replicas);
}

int cmd_verify(const std::string& which, double alpha, int N, int replicas,
               const std::string& k) {
    const ExperimentConfig cfg = flags_config(which, alpha, N, replicas, k);
    const MomentReport rep = dispatch_experiment(cfg);
    write_report_artifacts(rep, cfg.out_dir());
    print_report(rep);
    return rep.pass() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"simulation laboratory for eigenvector statistics of heavy-tailed random matrices"};
    app.require_subcommand(1);
    app.fallthrough();
    app.add_option("--seed", g_seed, "master seed")->capture_default_str();
    app.add_option("--workers", g_workers, "worker threads")->capture_default_str();
    app.add_option("--out-dir", g_out_dir, "output directory")->capture_default_str();

    double alpha = 1.5, beta = 0.0, scale = 1.0, re = 0.0, im = 0.01, s_time = 0.01;
    double gamma = 0.5, energy = 0.0, lo = 0.0, hi = 1.0;
    int N = 1000, replicas = 400, gens = 200, pmax = 3, points = 21, support = 40;
    std::size_t draws = 100000, pool = 100000, mc = 400000;
    bool one_sided = false, entry = false;
    std::string out, in, prefix = "part", rows_text, rows_out, backend = "quadrature";
    std::string xi_text = "k:1", q_text = "1", k_text = "center", config_path;

    auto* stable = app.add_subcommand("stable", "draw alpha-stable samples");
    stable->add_option("--alpha", alpha)->required();
    stable->add_option("--beta", beta);
    stable->add_option("--sigma", scale);
    stable->add_flag("--one-sided", one_sided, "positive law with unit Laplace scale");
    stable->add_flag("--entry", entry, "matrix-entry normalisation (needs --matrix-n)");
    stable->add_option("--matrix-n", N);
    stable->add_option("--n", draws);
    stable->add_option("--out", out, "CSV of draws");

    auto* matrix = app.add_subcommand("matrix", "dense matrix operations");
    matrix->require_subcommand(1);
    matrix->fallthrough();
    auto* mb = matrix->add_subcommand("build", "sample a heavy-tailed matrix");
    mb->fallthrough();
    mb->add_option("--alpha", alpha)->required();
    mb->add_option("--n", N)->required();
    mb->add_option("--out", out)->required();
    auto* md = matrix->add_subcommand("decompose", "split by entry size");
    md->fallthrough();
    md->add_option("--in", in)->required();
    md->add_option("--alpha", alpha)->required();
    md->add_option("--out-prefix", prefix);
    auto* mp = matrix->add_subcommand("perturb", "add an independent Gaussian of variance s");
    mp->fallthrough();
    mp->add_option("--in", in)->required();
    mp->add_option("--s", s_time)->required();
    mp->add_option("--out", out)->required();
    auto* mi = matrix->add_subcommand("interpolate", "comparison path between full and reduced");
    mi->fallthrough();
    mi->add_option("--in", in)->required();
    mi->add_option("--alpha", alpha)->required();
    mi->add_option("--gamma", gamma)->required();
    mi->add_option("--mc", mc);
    mi->add_option("--out", out)->required();
    auto* me = matrix->add_subcommand("eig", "spectrum and eigenvector rows");
    me->fallthrough();
    me->add_option("--in", in)->required();
    me->add_option("--out", out, "spectrum CSV");
    me->add_option("--rows", rows_text, "comma list of entry rows to extract");
    me->add_option("--rows-out", rows_out, "CSV of squared entries for extracted rows");

    auto* rde = app.add_subcommand("rde", "recursive distributional equation");
    rde->require_subcommand(1);
    rde->fallthrough();
    auto* rs = rde->add_subcommand("solve", "population dynamics at one point");
    rs->fallthrough();
    rs->add_option("--alpha", alpha)->required();
    rs->add_option("--re", re);
    rs->add_option("--im", im);
    rs->add_option("--pool", pool);
    rs->add_option("--gens", gens);
    auto* rm = rde->add_subcommand("mstar", "limiting Stieltjes transform");
    rm->fallthrough();
    rm->add_option("--alpha", alpha)->required();
    rm->add_option("--re", re);
    rm->add_option("--im", im);
    auto* rd = rde->add_subcommand("density", "spectral density on a grid");
    rd->fallthrough();
    rd->add_option("--alpha", alpha)->required();
    rd->add_option("--lo", lo);
    rd->add_option("--hi", hi);
    rd->add_option("--points", points);
    rd->add_option("--backend", backend)->check(CLI::IsMember({"quadrature", "pool"}));
    rd->add_option("--out", out)->required();

    auto* moments = app.add_subcommand("moments", "limiting moment predictions");
    moments->require_subcommand(1);
    moments->fallthrough();
    auto* ml = moments->add_subcommand("limit", "moment table at an energy");
    ml->fallthrough();
    ml->add_option("--alpha", alpha)->required();
    ml->add_option("--e", energy);
    ml->add_option("--pmax", pmax);
    ml->add_option("--out", out, "CSV of the table");

    auto* emf = app.add_subcommand("emf", "eigenvector flow comparison");
    emf->require_subcommand(1);
    emf->fallthrough();
    auto* er = emf->add_subcommand("run", "one overlap configuration vs prediction");
    er->fallthrough();
    er->add_option("--alpha", alpha)->required();
    er->add_option("--n", N)->required();
    er->add_option("--replicas", replicas);
    er->add_option("--xi", xi_text, "sites, e.g. 'k:2' or 'k:1,k+1:1'");
    er->add_option("--q", q_text, "direction entries, e.g. '1' or '1,2'");

    auto* verify = app.add_subcommand("verify", "statistical verification experiments");
    verify->require_subcommand(1);
    verify->fallthrough();
    for (const char* which : {"median", "joint", "dynamics", "que"}) {
        auto* v = verify->add_subcommand(which);
        v->fallthrough();
        v->add_option("--alpha", alpha)->required();
        v->add_option("--n", N)->required();
        v->add_option("--replicas", replicas)->required();
        v->add_option("--k", k_text, "'center' or a 1-based index");
    }

    auto* que = app.add_subcommand("que", "flatness statistic for one probe support");
    que->fallthrough();
    que->add_option("--alpha", alpha)->required();
    que->add_option("--n", N)->required();
    que->add_option("--support", support);
    que->add_option("--replicas", replicas);
    que->add_option("--out", out, "CSV of per-replica statistics");

    auto* runc = app.add_subcommand("run", "run an experiment from a config file");
    runc->fallthrough();
    runc->add_option("--config", config_path)->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand(stable))
            return cmd_stable(alpha, beta, scale, one_sided, entry, N, draws, out);
        if (app.got_subcommand(matrix)) {
            if (matrix->got_subcommand(mb)) return cmd_matrix_build(alpha, N, out);
            if (matrix->got_subcommand(md)) return cmd_matrix_decompose(in, alpha, prefix);
            if (matrix->got_subcommand(mp)) return cmd_matrix_perturb(in, s_time, out);
            if (matrix->got_subcommand(mi))
                return cmd_matrix_interpolate(in, alpha, gamma, mc, out);
            if (matrix->got_subcommand(me)) return cmd_matrix_eig(in, out, rows_text, rows_out);
        }
        if (app.got_subcommand(rde)) {
            if (rde->got_subcommand(rs)) return cmd_rde_solve(alpha, re, im, pool, gens);
            if (rde->got_subcommand(rm)) return cmd_rde_mstar(alpha, re, im);
            if (rde->got_subcommand(rd))
                return cmd_rde_density(alpha, lo, hi, points, backend, out);
        }
        if (app.got_subcommand(moments)) return cmd_moments_limit(alpha, energy, pmax, out);
        if (app.got_subcommand(emf)) return cmd_emf_run(alpha, N, replicas, xi_text, q_text);
        if (app.got_subcommand(verify)) {
            for (const auto* v : verify->get_subcommands())
                return cmd_verify(v->get_name(), alpha, N, replicas, k_text);
        }
        if (app.got_subcommand(que)) return cmd_que(alpha, N, support, replicas, out);
        if (app.got_subcommand(runc)) return run_experiment_file(config_path);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "levylab: %s\n", e.what());
        return 2;
    }
    return 0;
}
