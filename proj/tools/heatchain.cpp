// heatchain command-line driver.
//
// Every subcommand reads a JSON config, writes CSV tables into --out and a
// manifest.json holding the resolved config, seed and version. A manifest is
// itself accepted as --config and reproduces the run.

#include <heatchain/heatchain.hpp>

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#ifndef HEATCHAIN_VERSION
#define HEATCHAIN_VERSION "unknown"
#endif

namespace fs = std::filesystem;
using namespace heatchain;

namespace {

struct Common {
    std::string config;
    std::optional<std::uint64_t> seed;
    unsigned workers = 1;
    std::string out = ".";
};

void add_common(CLI::App* sub, Common& c)
{
    sub->add_option("--config", c.config, "JSON config file (or a previous manifest.json)")->required();
    sub->add_option("--seed", c.seed, "override every seed in the config");
    sub->add_option("--workers", c.workers, "worker threads; results do not depend on this")->check(CLI::Range(1u, 1024u));
    sub->add_option("--out", c.out, "output directory");
}

std::string out_path(const Common& c, const std::string& name) { return (fs::path(c.out) / name).string(); }

void write_manifest(const Common& c, const std::string& command, std::uint64_t seed, const json& resolved)
{
    json m = {{"manifest_version", 1},
              {"version", HEATCHAIN_VERSION},
              {"command", command},
              {"seed", seed},
              {"config", resolved}};
    std::ofstream f(out_path(c, "manifest.json"), std::ios::binary);
    require(bool(f), "cannot write manifest in '" + c.out + "'");
    f << m.dump(2) << '\n';
}

void prepare(const Common& c)
{
    std::error_code ec;
    fs::create_directories(c.out, ec);
    require(!ec, "cannot create output directory '" + c.out + "'");
}

// ---------------------------------------------------------------- simulate

void cmd_simulate(const Common& c)
{
    json root = load_config(c.config);
    ChainParams cp = parse_chain(section(root, "chain"));
    SimConfig sim = parse_sim(section(root, "sim"));
    if (c.seed)
        sim.seed = *c.seed;
    Chain chain(cp);
    ObservableStats st = run(chain, sim, c.workers);

    CsvTable sites("per-site statistics: <q^2>, <p^2> and reservoir flux R = zeta (T - <p^2>)",
                   {"site", "T", "zeta", "q2", "q2_se", "p2", "p2_se", "R", "R_se"});
    for (std::size_t j = 0; j < cp.N; ++j)
        sites.row(j, cp.T[j], cp.zeta[j], st.sites[j].q2.mean, st.sites[j].q2.se, st.sites[j].p2.mean,
                  st.sites[j].p2.se, st.sites[j].R.mean, st.sites[j].R.se);
    CsvTable bonds("per-bond current j -> j+1 (nearest-neighbour term and full cut)",
                   {"bond", "flux", "flux_se", "cut", "cut_se"});
    for (std::size_t j = 0; j + 1 < cp.N; ++j)
        bonds.row(j, st.bonds[j].flux.mean, st.bonds[j].flux.se, st.bonds[j].cut.mean, st.bonds[j].cut.se);
    sites.write(out_path(c, "sites.csv"));
    bonds.write(out_path(c, "bonds.csv"));
    write_manifest(c, "simulate", sim.seed, {{"chain", to_json(cp)}, {"sim", to_json(sim)}});
    std::cout << "samples per replica " << st.samples << ", batches " << st.batches << "\n";
}

// ----------------------------------------------------------- selfconsistent

int cmd_selfconsistent(const Common& c)
{
    json root = load_config(c.config);
    ChainParams cp = parse_chain(section(root, "chain"));
    SimConfig sim = parse_sim(section(root, "sim"));
    if (c.seed)
        sim.seed = *c.seed;
    SolverConfig sc = parse_solver(root.value("selfconsistent", json::object()), sim);
    sc.throw_on_failure = false;
    Profile prof = solve_profile(cp, sc, c.workers);

    CsvTable trace("self-consistent iterations: residuals and the profile simulated in that iteration",
                   {"iteration", "max_abs_R", "median_abs_R", "profile"});
    for (const auto& r : prof.trace) {
        std::string p;
        for (std::size_t j = 0; j < r.T.size(); ++j)
            p += (j ? ";" : "") + CsvTable::cell(r.T[j]);
        trace.row(r.iteration, r.max_abs_R, r.median_abs_R, p);
    }
    CsvTable profile("final bath temperatures with measured <p^2> and reservoir flux",
                     {"site", "T", "p2", "p2_se", "R", "R_se"});
    for (std::size_t j = 0; j < cp.N; ++j)
        profile.row(j, prof.T[j], prof.stats.sites[j].p2.mean, prof.stats.sites[j].p2.se, prof.stats.sites[j].R.mean,
                    prof.stats.sites[j].R.se);
    CsvTable bonds("per-bond current at the final profile", {"bond", "flux", "flux_se", "cut", "cut_se"});
    for (std::size_t j = 0; j + 1 < cp.N; ++j)
        bonds.row(j, prof.stats.bonds[j].flux.mean, prof.stats.bonds[j].flux.se, prof.stats.bonds[j].cut.mean,
                  prof.stats.bonds[j].cut.se);
    trace.write(out_path(c, "trace.csv"));
    profile.write(out_path(c, "profile.csv"));
    bonds.write(out_path(c, "bonds.csv"));
    write_manifest(c, "selfconsistent", sim.seed,
                   {{"chain", to_json(cp)}, {"sim", to_json(sim)}, {"selfconsistent", to_json(sc)}});
    if (!prof.converged) {
        std::cerr << "error: self-consistent profile did not converge in " << sc.max_outer << " iterations\n";
        for (const auto& line : detail::format_trace(prof.trace))
            std::cerr << "  " << line << "\n";
        return 2;
    }
    std::cout << "converged after " << prof.iterations << " iterations\n";
    return 0;
}

// ----------------------------------------------------------------- ou-check

void cmd_ou_check(const Common& c)
{
    json root = load_config(c.config);
    OuConfig oc = parse_ou(section(root, "ou"));
    const OUParams& P = oc.params;
    const double a = P.alpha();
    const double cc = curvature_c(P);

    CsvTable curve("exact 1/Dhat(p0) against the lattice approximation M/(2 alpha) + (c/alpha)(1 - cos p0)",
                   {"p0", "inv_dhat_exact", "inv_dhat_approx", "rel_err", "inv_dhat_printed_numerator"});
    double worst = 0.0;
    for (std::size_t i = 0; i < oc.points; ++i) {
        double p0 = oc.p0_max * double(i) / double(oc.points - 1);
        double ex = 1.0 / dhat_exact(P, p0);
        double ap = dhat_inverse(P, p0, cc);
        double rel = std::abs(ap - ex) / std::abs(ex);
        worst = std::max(worst, rel);
        curve.row(p0, ex, ap, rel, 1.0 / dhat_printed(P, p0));
    }

    // semigroup and covariance audits
    double semi = 0.0;
    for (double t1 : {0.1 / a, 1.0 / a, 3.0 / a})
        for (double t2 : {0.2 / a, 2.0 / a}) {
            Eigen::Matrix2d d = propagator(P, t1 + t2) - propagator(P, t1) * propagator(P, t2);
            semi = std::max(semi, d.norm() / propagator(P, t1 + t2).norm());
        }
    double ap = 0.5 * std::min(a, P.M / P.zeta);
    double cbound = fit_norm_bound(P, ap, 20.0 / a);

    CsvTable summary("Ornstein-Uhlenbeck audit for one decoupled site",
                     {"zeta", "M", "T", "alpha", "strong_pinning", "c", "c1", "cov_qq", "cov_pp", "semigroup_rel_err",
                      "alpha_prime", "norm_bound_c", "offdiag_ratio", "max_rel_err_inv_dhat"});
    Eigen::Matrix2d C = stationary_covariance(P);
    summary.row(P.zeta, P.M, P.T, a, P.M > a * a, cc, fit_c1(P), C(0, 0), C(1, 1), semi, ap, cbound,
                offdiag_audit(P), worst);
    curve.write(out_path(c, "dhat.csv"));
    summary.write(out_path(c, "ou_summary.csv"));
    write_manifest(c, "ou-check", 0, {{"ou", to_json(oc)}});
    std::cout << "c = " << cc << ", c1 = " << fit_c1(P) << ", max rel err of 1/Dhat approx = " << worst << "\n";
}

// ------------------------------------------------------------- polymer-eval

void cmd_polymer_eval(const Common& c)
{
    json root = load_config(c.config);
    PolymerConfig pc = parse_polymer(section(root, "polymer"));
    pc.engine.workers = c.workers;
    PolymerEngine E(pc.params, pc.lattice, pc.engine);

    CsvTable acts("activities rho(R) of all connected polymers up to max_size (epsilon = 1/zeta)",
                  {"polymer", "size", "cells", "rho", "quad_err"});
    auto polys = E.polymers(pc.caps.max_size);
    std::vector<ActivityResult> res(polys.size());
    parallel_for(polys.size(), c.workers, [&](std::size_t i) { res[i] = E.activity(polys[i]); });
    for (std::size_t i = 0; i < polys.size(); ++i) {
        std::string cells;
        for (std::size_t k = 0; k < polys[i].cells.size(); ++k) {
            Cell x = pc.lattice.cell(polys[i].cells[k]);
            cells += (k ? ";" : "") + std::to_string(x.t) + ":" + std::to_string(x.s);
        }
        acts.row(i, polys[i].size(), cells, res[i].rho, res[i].error);
    }

    CsvTable series("truncated cluster series by order (epsilon = " + CsvTable::cell(pc.params.epsilon()) + ")",
                    {"quantity", "order", "contribution", "cumulative", "quad_err", "tail"});
    auto lz = E.log_partition_series(pc.caps);
    double cum = 0.0;
    for (std::size_t n = 0; n < lz.per_order.size(); ++n) {
        cum += lz.per_order[n];
        series.row("log_Xi", n + 1, lz.per_order[n], cum, lz.quad_error, lz.tail);
    }
    if (pc.insertions.size() == 2) {
        auto s2 = E.two_point_series(pc.insertions[0], pc.insertions[1], pc.caps);
        cum = 0.0;
        for (std::size_t n = 0; n < s2.per_order.size(); ++n) {
            cum += s2.per_order[n];
            series.row("S2", n + 1, s2.per_order[n], cum, s2.quad_error, s2.tail);
        }
        std::cout << "S2 = " << s2.value << " (D1 " << s2.case_d1 << ", D2 " << s2.case_d2 << ", other "
                  << s2.case_other << ", flagged tuples " << s2.flagged << ")\n";
    }
    acts.write(out_path(c, "activities.csv"));
    series.write(out_path(c, "series.csv"));
    write_manifest(c, "polymer-eval", 0, {{"polymer", to_json(pc)}});
    std::cout << "log Xi = " << lz.value << " from " << lz.polymers << " polymers\n";
}

// ------------------------------------------------------------------ kp-cert

void cmd_kp_cert(const Common& c)
{
    json root = load_config(c.config);
    PolymerConfig pc = parse_polymer(section(root, "polymer"));
    std::vector<double> grid = pc.lambda_grid.empty() ? std::vector<double>{pc.params.lambda} : pc.lambda_grid;

    CsvTable tab("convergence certificate per lambda; pass iff kp_sum < 1",
                 {"lambda", "zeta", "epsilon", "M", "J", "p", "T", "c1", "A1", "A2", "A3", "A4", "A5", "A6", "K",
                  "Khat", "O1", "K1", "K2", "K3", "K4", "K5", "K6", "C1", "C2", "hypothesis_ok", "v_hat", "eps_K",
                  "c", "kp_sum", "margin", "m_prime", "pass", "reason"});
    std::ofstream rep(out_path(c, "certificate_report.txt"), std::ios::binary);
    require(bool(rep), "cannot write certificate report");
    std::size_t passes = 0;
    for (double lam : grid) {
        PolymerParams P = pc.params;
        P.lambda = lam;
        KpCertificate k = kp_check(P);
        passes += k.pass;
        tab.row(lam, P.zeta, P.epsilon(), P.M, P.J, P.p, P.T, P.c1_value(), k.A[0], k.A[1], k.A[2], k.A[3], k.A[4],
                k.A[5], k.K, k.Khat, k.O1, k.K1, k.K2, k.K3, k.K4, k.K5, k.K6, k.C1, k.C2, k.hypothesis_ok, k.v_hat,
                k.eps, k.c, k.kp_sum, k.margin, k.m_prime, k.pass, k.reason);
        rep << "lambda = " << lam << "  (zeta = " << P.zeta << ", epsilon = " << P.epsilon() << ")\n"
            << "  A1..A6   per-kind link ceilings |A^(s)_xy| <= A_s e^{-|x0-y0|/eps+1} (power law or delta)\n"
            << "           " << k.A[0] << " " << k.A[1] << " " << k.A[2] << " " << k.A[3] << " " << k.A[4] << " "
            << k.A[5] << "\n"
            << "  K        max A_s = " << k.K << "\n"
            << "  Khat     rescaled per-link ceiling = " << k.Khat << ",  O(1) row factor = " << k.O1 << "\n"
            << "  K1,K2    int |q|^a|p|^b e^{P} dnu <= K1 e^{K2} ... : " << k.K1 << ", " << k.K2 << "\n"
            << "  K3,K4,K5 U - P >= K3 q^6 + K4 p^2 - K5 : " << k.K3 << ", " << k.K4 << ", " << k.K5 << "\n"
            << "  K6       sup Gamma((1+n)/6) Gamma((1+m)/2) / Gamma(d) = " << k.K6 << "\n"
            << "  C1,C2    q^4 and p^2 coefficients of the stability polynomial: " << k.C1 << ", " << k.C2
            << "  (hypothesis " << (k.hypothesis_ok ? "holds" : "violated") << ")\n"
            << "  eps(K)   = " << k.eps << ",  c = " << k.c << ",  sum bound = " << k.kp_sum << "\n"
            << "  result   " << (k.pass ? "PASS" : "FAIL") << (k.reason.empty() ? "" : " (" + k.reason + ")")
            << "\n\n";
    }
    tab.write(out_path(c, "certificate.csv"));
    write_manifest(c, "kp-cert", 0, {{"polymer", to_json(pc)}});
    std::cout << passes << " of " << grid.size() << " lambda values certified\n";
}

// ----------------------------------------------------------- oracle-compare

void cmd_oracle_compare(const Common& c, std::size_t cells, double tol)
{
    json root = load_config(c.config);
    PolymerConfig pc = parse_polymer(section(root, "polymer"));
    require(cells >= 1 && cells <= 3, "--cells must be 1, 2 or 3 for the quadrature oracle");
    pc.engine.workers = c.workers;

    CsvTable tab("two-point series against direct quadrature; rel_diff = |series - oracle| / |oracle|",
                 {"slices", "sites", "x1", "c1", "x2", "c2", "series", "oracle", "combined_err", "rel_diff", "pass"});
    std::size_t rows = 0, ok = 0;
    for (std::size_t slices = 1; slices <= cells; ++slices)
        for (std::size_t sites = 1; slices * sites <= cells; ++sites) {
            Lattice L{slices, sites, pc.lattice.boundary_measures};
            PolymerEngine E(pc.params, L, pc.engine);
            QuadLevel lv = pc.engine.fixed_level ? *pc.engine.fixed_level : default_level(L.size());
            for (std::size_t a = 0; a < L.size(); ++a)
                for (std::size_t b = a; b < L.size(); ++b)
                    for (int ca = 0; ca < 2; ++ca)
                        for (int cb = 0; cb < 2; ++cb) {
                            Insertion x1{a, ca}, x2{b, cb};
                            auto s = E.two_point_series(x1, x2, pc.caps);
                            auto o = direct_two_point(pc.params, L, x1, x2, lv);
                            double diff = std::abs(s.value - o.value);
                            double rel = o.value != 0.0 ? diff / std::abs(o.value) : diff;
                            double comb = s.combined_error() + o.error;
                            bool pass = rel < tol || diff <= comb;
                            ++rows;
                            ok += pass;
                            tab.row(slices, sites, a, ca, b, cb, s.value, o.value, comb, rel, pass);
                        }
        }
    tab.write(out_path(c, "oracle_compare.csv"));
    json resolved = {{"polymer", to_json(pc)}, {"oracle", {{"cells", cells}, {"tol", tol}}}};
    write_manifest(c, "oracle-compare", 0, resolved);
    std::cout << ok << " of " << rows << " rows within tolerance\n";
}

// ------------------------------------------------------- conductivity-sweep

void cmd_sweep(const Common& c)
{
    json root = load_config(c.config);
    SweepSpec spec = parse_sweep(section(root, "sweep"));
    if (c.seed) {
        spec.production.seed = *c.seed;
        spec.solver.sim.seed = *c.seed;
    }
    SweepResult r = run_sweep(spec, c.workers, spec.production.seed);

    CsvTable tab("conductivity sweep; K = -F / (dT/dj) over the interior, bath profile self-consistent",
                 {"T", "lambda", "J", "N", "flux", "flux_err", "K", "K_err", "seed", "config_hash", "converged",
                  "iterations", "c_eps_implied", "K_perturbative"});
    double c_eps = 0.0;
    for (const auto& p : r.points)
        if (p.K > 0.0 && c_eps == 0.0)
            c_eps = calibrate_c_eps(p.K, p.T, p.J, p.lambda); // first point fixes c(eps)
    for (const auto& p : r.points) {
        double implied = p.K > 0.0 ? calibrate_c_eps(p.K, p.T, p.J, p.lambda) : 0.0;
        double kp = 0.0;
        if (c_eps > 0.0) {
            auto prof = conductivity_profile(p.T * (1 + 0.5 * spec.rel_gradient), p.T * (1 - 0.5 * spec.rel_gradient),
                                             spec.N, p.J, p.lambda, c_eps);
            kp = prof.K;
        }
        tab.row(p.T, p.lambda, p.J, p.N, p.flux.mean, p.flux.se, p.K, p.K_err, p.seed, p.config_hash, p.converged,
                p.iterations, implied, kp);
    }
    tab.write(out_path(c, "sweep.csv"));
    std::ofstream fit(out_path(c, "fit.txt"), std::ios::binary);
    if (r.fitted)
        fit << "slope " << CsvTable::cell(r.fit.slope) << "\nslope_se " << CsvTable::cell(r.fit.slope_se) << "\nci_lo "
            << CsvTable::cell(r.fit.ci_lo) << "\nci_hi " << CsvTable::cell(r.fit.ci_hi) << "\nlevel " << r.fit.level
            << "\nc_eps " << CsvTable::cell(c_eps) << "\n";
    else
        fit << "no fit: need at least 4 points with K > 0 spanning a factor of 4 in T\n";
    write_manifest(c, "conductivity-sweep", spec.production.seed, {{"sweep", to_json(spec)}});
    if (r.fitted)
        std::cout << "exponent " << r.fit.slope << "  [" << r.fit.ci_lo << ", " << r.fit.ci_hi << "]\n";
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"heatchain: anharmonic chain heat transport and its cluster expansion"};
    app.set_version_flag("--version", HEATCHAIN_VERSION);
    app.require_subcommand(1);

    Common c;
    std::size_t cells = 2;
    double tol = 1e-4;
    auto* sim = app.add_subcommand("simulate", "Langevin run: per-site and per-bond statistics");
    auto* sc = app.add_subcommand("selfconsistent", "solve for interior bath temperatures with zero net flux");
    auto* ou = app.add_subcommand("ou-check", "Ornstein-Uhlenbeck propagator, covariance and 1/Dhat audits");
    auto* pe = app.add_subcommand("polymer-eval", "polymer activities and truncated cluster series");
    auto* kp = app.add_subcommand("kp-cert", "convergence certificate over a lambda grid");
    auto* oc = app.add_subcommand("oracle-compare", "series against direct quadrature on small lattices");
    auto* sw = app.add_subcommand("conductivity-sweep", "temperature sweep and K(T) exponent fit");
    for (auto* s : {sim, sc, ou, pe, kp, oc, sw})
        add_common(s, c);
    oc->add_option("--cells", cells, "largest lattice size (cells)");
    oc->add_option("--tol", tol, "relative tolerance");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        prepare(c);
        if (sim->parsed())
            cmd_simulate(c);
        else if (sc->parsed())
            return cmd_selfconsistent(c);
        else if (ou->parsed())
            cmd_ou_check(c);
        else if (pe->parsed())
            cmd_polymer_eval(c);
        else if (kp->parsed())
            cmd_kp_cert(c);
        else if (oc->parsed())
            cmd_oracle_compare(c, cells, tol);
        else if (sw->parsed())
            cmd_sweep(c);
    } catch (const ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 1;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        for (const auto& line : e.trace)
            std::cerr << "  " << line << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
