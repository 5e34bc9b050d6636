#pragma once

/** @file config.hpp
 *  @brief JSON configuration: parsing with strict key checks, and the
 *         resolved form written into run manifests.
 *
 *  Physics parameters (M, lambda, zeta, temperatures) have no defaults;
 *  numerical knobs do.
 */

#include "conductivity.hpp"
#include "polymer.hpp"
#include "selfconsistent.hpp"

#include <json.hpp>

#include <fstream>
#include <initializer_list>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace heatchain {

using json = nlohmann::json;

namespace cfg {

inline void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& ctx)
{
    require(j.is_object(), ctx + ": expected an object");
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (auto it = j.begin(); it != j.end(); ++it)
        require(ok.count(it.key()) != 0, ctx + ": unknown key '" + it.key() + "'");
}

template <class T>
T get(const json& j, const char* key, const std::string& ctx)
{
    require(j.contains(key), ctx + ": missing required key '" + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ValidationError(ctx + "." + key + ": " + e.what());
    }
}

template <class T>
T get_or(const json& j, const char* key, T dflt, const std::string& ctx)
{
    return j.contains(key) ? get<T>(j, key, ctx) : dflt;
}

/// Scalar broadcast to n entries, or an explicit array of length n.
inline std::vector<double> per_site(const json& j, const char* key, std::size_t n, const std::string& ctx)
{
    require(j.contains(key), ctx + ": missing required key '" + key + "'");
    const json& v = j.at(key);
    if (v.is_number())
        return std::vector<double>(n, v.get<double>());
    auto out = get<std::vector<double>>(j, key, ctx);
    require(out.size() == n, ctx + "." + key + ": expected " + std::to_string(n) + " entries");
    return out;
}

inline CouplingSpec parse_coupling(const json& j, const std::string& ctx)
{
    check_keys(j, {"J", "p", "range"}, ctx);
    CouplingSpec c;
    c.J = get<double>(j, "J", ctx);
    c.p = get_or<double>(j, "p", 2.0, ctx);
    c.range = get_or<std::size_t>(j, "range", 0, ctx);
    require(c.J >= 0.0, ctx + ".J must be >= 0");
    require(c.p > 1.0, ctx + ".p must exceed 1");
    return c;
}

inline json to_json(const CouplingSpec& c) { return {{"J", c.J}, {"p", c.p}, {"range", c.range}}; }

} // namespace cfg

/// "chain": {N, M, lambda, zeta, T | T_left+T_right, coupling{J,p,range}, periodic}
inline ChainParams parse_chain(const json& j)
{
    const std::string ctx = "chain";
    cfg::check_keys(j, {"N", "M", "lambda", "zeta", "T", "T_left", "T_right", "coupling", "periodic", "mass"}, ctx);
    ChainParams cp;
    cp.N = cfg::get<std::size_t>(j, "N", ctx);
    require(cp.N >= 1, "chain.N must be >= 1");
    cp.M = cfg::per_site(j, "M", cp.N, ctx);
    cp.lambda = cfg::get<double>(j, "lambda", ctx);
    cp.zeta = cfg::per_site(j, "zeta", cp.N, ctx);
    if (j.contains("T")) {
        require(!j.contains("T_left") && !j.contains("T_right"), "chain: give either T or T_left/T_right");
        cp.T = cfg::per_site(j, "T", cp.N, ctx);
    } else {
        double a = cfg::get<double>(j, "T_left", ctx), b = cfg::get<double>(j, "T_right", ctx);
        cp.T = linear_profile(cp.N, a, b);
    }
    require(j.contains("coupling"), "chain: missing required key 'coupling'");
    cp.coupling = cfg::parse_coupling(j.at("coupling"), "chain.coupling");
    cp.periodic = cfg::get_or<bool>(j, "periodic", false, ctx);
    cp.mass = cfg::get_or<double>(j, "mass", 1.0, ctx);
    cp.validate();
    return cp;
}

inline json to_json(const ChainParams& cp)
{
    return {{"N", cp.N},         {"M", cp.M}, {"lambda", cp.lambda}, {"zeta", cp.zeta}, {"T", cp.T},
            {"coupling", cfg::to_json(cp.coupling)}, {"periodic", cp.periodic}, {"mass", cp.mass}};
}

/// "sim": {dt, n_steps, burn_in, seed, batch_count, replicas, sample_every, scheme}
inline SimConfig parse_sim(const json& j, const std::string& ctx = "sim")
{
    cfg::check_keys(j, {"dt", "n_steps", "burn_in", "seed", "batch_count", "replicas", "sample_every", "scheme"}, ctx);
    SimConfig s;
    s.dt = cfg::get<double>(j, "dt", ctx);
    s.n_steps = cfg::get<std::uint64_t>(j, "n_steps", ctx);
    s.burn_in = cfg::get_or<std::uint64_t>(j, "burn_in", s.n_steps / 10, ctx);
    s.seed = cfg::get_or<std::uint64_t>(j, "seed", 0, ctx);
    s.batch_count = cfg::get_or<std::size_t>(j, "batch_count", 20, ctx);
    s.replicas = cfg::get_or<std::size_t>(j, "replicas", 1, ctx);
    s.sample_every = cfg::get_or<std::size_t>(j, "sample_every", 1, ctx);
    s.scheme = parse_scheme(cfg::get_or<std::string>(j, "scheme", "euler", ctx));
    return s;
}

inline json to_json(const SimConfig& s)
{
    return {{"dt", s.dt},
            {"n_steps", s.n_steps},
            {"burn_in", s.burn_in},
            {"seed", s.seed},
            {"batch_count", s.batch_count},
            {"replicas", s.replicas},
            {"sample_every", s.sample_every},
            {"scheme", to_string(s.scheme)}};
}

/// "selfconsistent": {eta, tol, z_sigma, max_outer, common_random_numbers}; the
/// per-iteration simulation comes from `sim`.
inline SolverConfig parse_solver(const json& j, const SimConfig& sim, const std::string& ctx = "selfconsistent")
{
    cfg::check_keys(j, {"eta", "tol", "z_sigma", "max_outer", "common_random_numbers"}, ctx);
    SolverConfig s;
    s.eta = cfg::get_or<double>(j, "eta", 0.5, ctx);
    s.tol = cfg::get_or<double>(j, "tol", 1e-2, ctx);
    s.z_sigma = cfg::get_or<double>(j, "z_sigma", 0.0, ctx);
    s.max_outer = cfg::get_or<std::size_t>(j, "max_outer", 30, ctx);
    s.common_random_numbers = cfg::get_or<bool>(j, "common_random_numbers", true, ctx);
    s.sim = sim;
    return s;
}

inline json to_json(const SolverConfig& s)
{
    return {{"eta", s.eta},
            {"tol", s.tol},
            {"z_sigma", s.z_sigma},
            {"max_outer", s.max_outer},
            {"common_random_numbers", s.common_random_numbers}};
}

/// Polymer-side settings: physics plus lattice, truncation and quadrature.
struct PolymerConfig {
    PolymerParams params;
    Lattice lattice;
    SeriesCaps caps;
    EngineOptions engine;
    std::vector<Insertion> insertions; ///< exactly two for two-point evaluations
    std::vector<double> lambda_grid;   ///< kp-cert scan
    std::size_t max_oracle_cells = 3;
};

inline PolymerConfig parse_polymer(const json& j)
{
    const std::string ctx = "polymer";
    cfg::check_keys(j,
                    {"zeta", "M", "lambda", "J", "p", "range", "T", "T_sites", "c1", "slices", "sites",
                     "boundary_measures", "max_n", "max_size", "level", "insertions", "lambda_grid",
                     "max_oracle_cells"},
                    ctx);
    PolymerConfig c;
    auto& P = c.params;
    P.zeta = cfg::get<double>(j, "zeta", ctx);
    P.M = cfg::get<double>(j, "M", ctx);
    P.lambda = cfg::get<double>(j, "lambda", ctx);
    P.J = cfg::get<double>(j, "J", ctx);
    P.T = cfg::get<double>(j, "T", ctx);
    P.p = cfg::get_or<double>(j, "p", 2.0, ctx);
    P.range = cfg::get_or<std::size_t>(j, "range", 0, ctx);
    P.T_sites = cfg::get_or<std::vector<double>>(j, "T_sites", {}, ctx);
    if (j.contains("c1") && !j.at("c1").is_null())
        P.c1 = cfg::get<double>(j, "c1", ctx);
    P.validate();
    c.lattice.slices = cfg::get_or<std::size_t>(j, "slices", 1, ctx);
    c.lattice.sites = cfg::get_or<std::size_t>(j, "sites", 2, ctx);
    c.lattice.boundary_measures = cfg::get_or<bool>(j, "boundary_measures", true, ctx);
    c.lattice.validate();
    c.caps.max_n = cfg::get_or<std::size_t>(j, "max_n", 3, ctx);
    c.caps.max_size = cfg::get_or<std::size_t>(j, "max_size", 3, ctx);
    if (j.contains("level")) {
        const json& l = j.at("level");
        cfg::check_keys(l, {"m_q", "m_p"}, "polymer.level");
        c.engine.fixed_level = QuadLevel{cfg::get<std::size_t>(l, "m_q", "polymer.level"),
                                         cfg::get<std::size_t>(l, "m_p", "polymer.level")};
    }
    if (j.contains("insertions")) {
        for (const auto& e : j.at("insertions")) {
            require(e.is_array() && e.size() == 2, "polymer.insertions: entries are [cell, component]");
            Insertion in{e[0].get<std::size_t>(), e[1].get<int>()};
            require(in.cell < c.lattice.size(), "polymer.insertions: cell outside lattice");
            require(in.component == 0 || in.component == 1, "polymer.insertions: component is 0 (q) or 1 (p)");
            c.insertions.push_back(in);
        }
        require(c.insertions.size() == 2, "polymer.insertions: exactly two insertions are required");
    }
    c.lambda_grid = cfg::get_or<std::vector<double>>(j, "lambda_grid", {}, ctx);
    c.max_oracle_cells = cfg::get_or<std::size_t>(j, "max_oracle_cells", 3, ctx);
    return c;
}

inline json to_json(const PolymerConfig& c)
{
    const auto& P = c.params;
    json j = {{"zeta", P.zeta},
              {"M", P.M},
              {"lambda", P.lambda},
              {"J", P.J},
              {"p", P.p},
              {"range", P.range},
              {"T", P.T},
              {"T_sites", P.T_sites},
              {"c1", P.c1_value()},
              {"slices", c.lattice.slices},
              {"sites", c.lattice.sites},
              {"boundary_measures", c.lattice.boundary_measures},
              {"max_n", c.caps.max_n},
              {"max_size", c.caps.max_size},
              {"lambda_grid", c.lambda_grid},
              {"max_oracle_cells", c.max_oracle_cells}};
    if (c.engine.fixed_level)
        j["level"] = {{"m_q", c.engine.fixed_level->m_q}, {"m_p", c.engine.fixed_level->m_p}};
    json ins = json::array();
    for (const auto& i : c.insertions)
        ins.push_back({i.cell, i.component});
    if (!c.insertions.empty())
        j["insertions"] = ins;
    return j;
}

/// "ou": {zeta, M, T, p0_max, points}
struct OuConfig {
    OUParams params;
    double p0_max = 1.5707963267948966;
    std::size_t points = 33;
};

inline OuConfig parse_ou(const json& j)
{
    const std::string ctx = "ou";
    cfg::check_keys(j, {"zeta", "M", "T", "p0_max", "points"}, ctx);
    OuConfig c;
    c.params.zeta = cfg::get<double>(j, "zeta", ctx);
    c.params.M = cfg::get<double>(j, "M", ctx);
    c.params.T = cfg::get<double>(j, "T", ctx);
    c.params.validate();
    c.p0_max = cfg::get_or<double>(j, "p0_max", c.p0_max, ctx);
    c.points = cfg::get_or<std::size_t>(j, "points", c.points, ctx);
    require(c.points >= 2, "ou.points must be >= 2");
    return c;
}

inline json to_json(const OuConfig& c)
{
    return {{"zeta", c.params.zeta}, {"M", c.params.M}, {"T", c.params.T}, {"p0_max", c.p0_max}, {"points", c.points}};
}

/// "sweep": {N, M, lambda, coupling, zeta_boundary, zeta_interior, temps,
///           rel_gradient, trim, selfconsistent{...}, solver_sim{...}, production{...}}
inline SweepSpec parse_sweep(const json& j)
{
    const std::string ctx = "sweep";
    cfg::check_keys(j,
                    {"N", "M", "lambda", "coupling", "zeta_boundary", "zeta_interior", "temps", "rel_gradient", "trim",
                     "selfconsistent", "solver_sim", "production"},
                    ctx);
    SweepSpec s;
    s.N = cfg::get<std::size_t>(j, "N", ctx);
    s.M = cfg::get<double>(j, "M", ctx);
    s.lambda = cfg::get<double>(j, "lambda", ctx);
    require(j.contains("coupling"), "sweep: missing required key 'coupling'");
    s.coupling = cfg::parse_coupling(j.at("coupling"), "sweep.coupling");
    s.zeta_boundary = cfg::get<double>(j, "zeta_boundary", ctx);
    s.zeta_interior = cfg::get<double>(j, "zeta_interior", ctx);
    s.temps = cfg::get<std::vector<double>>(j, "temps", ctx);
    s.rel_gradient = cfg::get_or<double>(j, "rel_gradient", 0.5, ctx);
    s.trim = cfg::get_or<std::size_t>(j, "trim", 2, ctx);
    require(j.contains("production"), "sweep: missing required key 'production'");
    s.production = parse_sim(j.at("production"), "sweep.production");
    SimConfig solver_sim = j.contains("solver_sim") ? parse_sim(j.at("solver_sim"), "sweep.solver_sim") : s.production;
    s.solver = parse_solver(j.value("selfconsistent", json::object()), solver_sim, "sweep.selfconsistent");
    s.validate();
    return s;
}

inline json to_json(const SweepSpec& s)
{
    return {{"N", s.N},
            {"M", s.M},
            {"lambda", s.lambda},
            {"coupling", cfg::to_json(s.coupling)},
            {"zeta_boundary", s.zeta_boundary},
            {"zeta_interior", s.zeta_interior},
            {"temps", s.temps},
            {"rel_gradient", s.rel_gradient},
            {"trim", s.trim},
            {"selfconsistent", to_json(s.solver)},
            {"solver_sim", to_json(s.solver.sim)},
            {"production", to_json(s.production)}};
}

/// Reads a config file. A run manifest is accepted too: its "config" member
/// holds the resolved configuration of the original run.
inline json load_config(const std::string& path)
{
    std::ifstream in(path);
    require(bool(in), "cannot open config file '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ValidationError("config '" + path + "' is not valid JSON: " + e.what());
    }
    require(j.is_object(), "config root must be an object");
    if (j.contains("manifest_version") && j.contains("config"))
        return j.at("config");
    return j;
}

inline const json& section(const json& root, const char* name)
{
    require(root.contains(name), std::string("config: missing section '") + name + "'");
    return root.at(name);
}

} // namespace heatchain
