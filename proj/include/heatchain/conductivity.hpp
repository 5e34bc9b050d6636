#pragma once

/** @file conductivity.hpp
 *  @brief Perturbative heat flux, the telescoping conductivity profile, and
 *         simulation sweeps with a power-law fit of K(T).
 */

#include "hash.hpp"
#include "rng.hpp"
#include "selfconsistent.hpp"

#include <boost/math/tools/toms748_solve.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

namespace heatchain {

inline constexpr double kConductivityAlpha = 4.0 / 3.0;

/// Leading-order current between neighbours at temperatures Tj and Tj1:
/// -c J^2 lambda^{-4/3} Tj^{-4/3} (Tj1 - Tj).
inline double perturbative_flux(double Tj, double Tj1, double J, double lambda, double c_eps)
{
    require(Tj > 0.0 && Tj1 > 0.0, "temperatures must be > 0");
    require(lambda > 0.0, "lambda must be > 0");
    return -c_eps * J * J * std::pow(lambda, -4.0 / 3.0) * std::pow(Tj, -kConductivityAlpha) * (Tj1 - Tj);
}

struct ConductivityProfile {
    double F = 0.0;          ///< stationary current
    std::vector<double> T;   ///< T_1..T_N
    double K = 0.0;          ///< (N-1) / sum_j C T_j^alpha
    double C = 0.0;          ///< lambda^{4/3} / (c J^2)
    double max_residual = 0.0; ///< worst relative residual of the N-1 flux equations
    bool ok = true;
    std::string flag;        ///< reason when !ok
};

/// Solves F C T_j^alpha = T_j - T_{j+1}, j = 1..N-1, for F and the interior
/// temperatures by shooting on F. Large gradients that leave the linear
/// regime are returned with ok = false rather than thrown.
inline ConductivityProfile conductivity_profile(double T1, double TN, std::size_t N, double J, double lambda,
                                                double c_eps, double alpha = kConductivityAlpha)
{
    require(N >= 2, "N must be >= 2");
    require(T1 > 0.0 && TN > 0.0, "temperatures must be > 0");
    require(J > 0.0 && lambda > 0.0 && c_eps > 0.0, "J, lambda and c_eps must be > 0");

    ConductivityProfile out;
    out.C = std::pow(lambda, 4.0 / 3.0) / (c_eps * J * J);
    const double C = out.C;
    out.T.assign(N, T1);

    // Forward recursion; returns T_N - TN. A temperature that turns
    // non-positive stops the recursion and returns t - TN < 0, which keeps the
    // function finite and monotone for the root finder.
    auto shoot = [&](double F, std::vector<double>* prof) {
        double t = T1;
        if (prof)
            (*prof)[0] = t;
        for (std::size_t j = 1; j < N; ++j) {
            t -= F * C * std::pow(t, alpha);
            if (!(t > 0.0))
                return prof ? -std::numeric_limits<double>::infinity() : t - TN;
            if (!std::isfinite(t))
                return std::numeric_limits<double>::infinity();
            if (prof)
                (*prof)[j] = t;
        }
        return t - TN;
    };

    if (T1 == TN) {
        out.F = 0.0;
        out.K = double(N - 1) / (double(N - 1) * C * std::pow(T1, alpha));
        return out;
    }

    // Along the path T stays between T1 and TN, which brackets the root.
    const double dT = T1 - TN;
    const double lo_T = std::min(T1, TN);
    double a = 0.0;
    double b = dT / (C * std::pow(lo_T, alpha) * double(N - 1));
    if (b < a)
        std::swap(a, b);
    double fa = shoot(a, nullptr), fb = shoot(b, nullptr);
    if (!(fa * fb <= 0.0)) {
        out.ok = false;
        out.flag = "shooting bracket failed";
        return out;
    }
    try {
        boost::uintmax_t iters = 200;
        auto tol = boost::math::tools::eps_tolerance<double>(52);
        auto r = boost::math::tools::toms748_solve([&](double F) { return shoot(F, nullptr); }, a, b, fa, fb,
                                                   tol, iters);
        out.F = 0.5 * (r.first + r.second);
    } catch (const std::exception& e) {
        out.ok = false;
        out.flag = std::string("root finding failed: ") + e.what();
        return out;
    }
    if (!std::isfinite(shoot(out.F, &out.T))) {
        out.ok = false;
        out.flag = "profile left the positive-temperature region";
        return out;
    }
    out.T[N - 1] = TN;

    double sum = 0.0;
    for (std::size_t j = 0; j + 1 < N; ++j) {
        double lhs = out.F * C * std::pow(out.T[j], alpha);
        double rhs = out.T[j] - out.T[j + 1];
        sum += C * std::pow(out.T[j], alpha);
        double scale = std::max(std::abs(rhs), std::abs(lhs));
        if (scale > 0.0)
            out.max_residual = std::max(out.max_residual, std::abs(lhs - rhs) / scale);
        if (std::abs(rhs) > 0.5 * out.T[j]) {
            out.ok = false;
            out.flag = "gradient outside the linear-response regime";
        }
    }
    out.K = double(N - 1) / sum;
    return out;
}

/// c(eps) implied by a measured conductivity K at temperature T.
inline double calibrate_c_eps(double K, double T, double J, double lambda)
{
    require(K > 0.0 && T > 0.0 && J > 0.0 && lambda > 0.0, "calibration inputs must be > 0");
    return K * std::pow(lambda, 4.0 / 3.0) * std::pow(T, kConductivityAlpha) / (J * J);
}

struct FitPoint {
    double T = 0.0;
    double K = 0.0;
    double K_err = 0.0;
};

struct ExponentFit {
    double slope = 0.0;
    double intercept = 0.0;   ///< log K at T = 1
    double slope_se = 0.0;    ///< bootstrap standard deviation
    double ci_lo = 0.0, ci_hi = 0.0;
    double level = 0.95;
    std::size_t n = 0;
};

namespace detail {

inline void wls(const std::vector<double>& x, const std::vector<double>& y, const std::vector<double>& w,
                double& slope, double& icept)
{
    double sw = 0, sx = 0, sy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sw += w[i];
        sx += w[i] * x[i];
        sy += w[i] * y[i];
    }
    double mx = sx / sw, my = sy / sw, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += w[i] * (x[i] - mx) * (x[i] - mx);
        sxy += w[i] * (x[i] - mx) * (y[i] - my);
    }
    slope = sxy / sxx;
    icept = my - slope * mx;
}

inline double quantile(std::vector<double> v, double q)
{
    std::sort(v.begin(), v.end());
    double pos = q * double(v.size() - 1);
    std::size_t i = std::size_t(pos);
    double f = pos - double(i);
    return i + 1 < v.size() ? v[i] * (1 - f) + v[i + 1] * f : v.back();
}

} // namespace detail

/// Weighted least squares of log K against log T, with a parametric bootstrap
/// over the point errors for the confidence interval.
inline ExponentFit fit_exponent(const std::vector<FitPoint>& pts, std::uint64_t seed = 0,
                                std::size_t n_boot = 4000, double level = 0.95)
{
    require(pts.size() >= 4, "exponent fit needs at least 4 temperature points");
    double tmin = pts.front().T, tmax = pts.front().T;
    for (const auto& p : pts) {
        require(p.T > 0.0 && p.K > 0.0 && p.K_err >= 0.0, "fit points need T > 0, K > 0, K_err >= 0");
        tmin = std::min(tmin, p.T);
        tmax = std::max(tmax, p.T);
    }
    require(tmax >= 4.0 * tmin, "insufficient temperature span: need a factor of at least 4");
    require(level > 0.0 && level < 1.0, "confidence level must lie in (0, 1)");

    const std::size_t n = pts.size();
    std::vector<double> x(n), y(n), s(n), w(n);
    bool weighted = true;
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = std::log(pts[i].T);
        y[i] = std::log(pts[i].K);
        s[i] = pts[i].K_err / pts[i].K;
        if (s[i] <= 0.0)
            weighted = false;
    }
    for (std::size_t i = 0; i < n; ++i)
        w[i] = weighted ? 1.0 / (s[i] * s[i]) : 1.0;

    ExponentFit f;
    f.n = n;
    f.level = level;
    detail::wls(x, y, w, f.slope, f.intercept);

    Engine eng = make_engine(seed, 0, 7);
    Gaussian g(eng);
    std::vector<double> slopes(n_boot), yb(n);
    for (std::size_t b = 0; b < n_boot; ++b) {
        for (std::size_t i = 0; i < n; ++i)
            yb[i] = y[i] + s[i] * g();
        double ic;
        detail::wls(x, yb, w, slopes[b], ic);
    }
    double m = 0.0, v = 0.0;
    for (double sl : slopes)
        m += sl;
    m /= double(n_boot);
    for (double sl : slopes)
        v += (sl - m) * (sl - m);
    f.slope_se = n_boot > 1 ? std::sqrt(v / double(n_boot - 1)) : 0.0;
    f.ci_lo = detail::quantile(slopes, 0.5 * (1.0 - level));
    f.ci_hi = detail::quantile(slopes, 0.5 * (1.0 + level));
    return f;
}

/// Physical and numerical description of a temperature sweep. Each point has
/// boundary temperatures T (1 +- rel_gradient / 2), the interior baths are
/// tuned to zero net flux, and K is read from the interior of the chain.
struct SweepSpec {
    std::size_t N = 0;
    double M = 0.0;
    double lambda = 0.0;
    CouplingSpec coupling;
    double zeta_boundary = 0.0;
    double zeta_interior = 0.0;
    std::vector<double> temps;
    double rel_gradient = 0.5;
    std::size_t trim = 2;     ///< sites dropped at each end when reading the gradient
    SolverConfig solver;      ///< self-consistent search
    SimConfig production;     ///< final run at the converged profile

    void validate() const
    {
        require(N >= 2 * trim + 3, "chain too short for the requested trim");
        require(M > 0.0 && lambda >= 0.0, "M must be > 0 and lambda >= 0");
        require(zeta_boundary > 0.0 && zeta_interior >= 0.0, "bath couplings must be non-negative");
        require(rel_gradient > 0.0 && rel_gradient < 2.0, "rel_gradient must lie in (0, 2)");
        require(!temps.empty(), "sweep needs at least one temperature");
        for (double t : temps)
            require(t > 0.0, "temperatures must be > 0");
    }

    ChainParams chain_at(double T) const
    {
        ChainParams cp = make_chain(N, M, lambda, zeta_interior, T * (1.0 + 0.5 * rel_gradient),
                                    T * (1.0 - 0.5 * rel_gradient), coupling);
        cp.zeta.front() = zeta_boundary;
        cp.zeta.back() = zeta_boundary;
        return cp;
    }
};

struct SweepPoint {
    double T = 0.0, lambda = 0.0, J = 0.0;
    std::size_t N = 0;
    Estimate flux;        ///< current averaged over interior cuts
    Estimate gradient;    ///< d<p^2>/dj over the interior
    double K = 0.0, K_err = 0.0;
    std::uint64_t seed = 0;
    std::string config_hash;
    bool converged = false;
    std::size_t iterations = 0;
    std::vector<double> profile;  ///< bath temperatures used in production
    std::vector<double> p2;       ///< measured <p_j^2>
};

struct SweepResult {
    std::vector<SweepPoint> points;
    ExponentFit fit;
    bool fitted = false;
};

/// Reads K = -F / (dT/dj) from the interior of a finished run.
inline void interior_conductivity(const ObservableStats& st, std::size_t trim, SweepPoint& pt)
{
    const std::size_t N = st.sites.size();
    const std::size_t a = trim, b = N - 1 - trim;
    // current: mean over the interior cuts a..b-1
    double F = 0.0, Fse = 0.0;
    for (std::size_t j = a; j < b; ++j) {
        F += st.bonds[j].cut.mean;
        Fse += st.bonds[j].cut.se;
    }
    F /= double(b - a);
    Fse /= double(b - a); // cut currents are strongly correlated; average the SEs
    // gradient: weighted linear fit of <p^2> on sites a..b
    double sw = 0, sx = 0, sy = 0;
    for (std::size_t j = a; j <= b; ++j) {
        double se = std::max(st.sites[j].p2.se, 1e-300);
        double w = 1.0 / (se * se);
        sw += w;
        sx += w * double(j);
        sy += w * st.sites[j].p2.mean;
    }
    double mx = sx / sw, sxx = 0, sxy = 0;
    for (std::size_t j = a; j <= b; ++j) {
        double se = std::max(st.sites[j].p2.se, 1e-300);
        double w = 1.0 / (se * se);
        sxx += w * (double(j) - mx) * (double(j) - mx);
        sxy += w * (double(j) - mx) * (st.sites[j].p2.mean - sy / sw);
    }
    pt.flux = {F, Fse};
    pt.gradient = {sxy / sxx, std::sqrt(1.0 / sxx)};
    pt.K = -F / pt.gradient.mean;
    double rf = F != 0.0 ? Fse / F : 0.0;
    double rg = pt.gradient.se / pt.gradient.mean;
    pt.K_err = std::abs(pt.K) * std::sqrt(rf * rf + rg * rg);
    pt.p2.resize(N);
    for (std::size_t j = 0; j < N; ++j)
        pt.p2[j] = st.sites[j].p2.mean;
}

inline std::string point_fingerprint(const SweepSpec& s, double T, std::uint64_t seed)
{
    std::ostringstream os;
    os.precision(17);
    os << "N=" << s.N << ";M=" << s.M << ";lambda=" << s.lambda << ";J=" << s.coupling.J << ";p=" << s.coupling.p
       << ";range=" << s.coupling.range << ";zb=" << s.zeta_boundary << ";zi=" << s.zeta_interior << ";T=" << T
       << ";grad=" << s.rel_gradient << ";trim=" << s.trim << ";eta=" << s.solver.eta << ";tol=" << s.solver.tol
       << ";outer=" << s.solver.max_outer << ";dt=" << s.production.dt << ";steps=" << s.production.n_steps
       << ";burn=" << s.production.burn_in << ";scheme=" << to_string(s.production.scheme) << ";seed=" << seed;
    return hex64(fnv1a64(os.str()));
}

/// Runs every temperature point (in parallel over points) and fits the
/// exponent of K(T) when at least 4 points span a factor of 4.
inline SweepResult run_sweep(const SweepSpec& spec, unsigned workers = 1, std::uint64_t fit_seed = 0)
{
    spec.validate();
    SweepResult res;
    res.points.resize(spec.temps.size());
    parallel_for(spec.temps.size(), workers, [&](std::size_t i) {
        const double T = spec.temps[i];
        SweepPoint& pt = res.points[i];
        pt.T = T;
        pt.lambda = spec.lambda;
        pt.J = spec.coupling.J;
        pt.N = spec.N;
        pt.seed = spec.production.seed + i;

        ChainParams cp = spec.chain_at(T);
        SolverConfig sc = spec.solver;
        sc.sim.seed = spec.solver.sim.seed + i;
        sc.throw_on_failure = false;
        Profile prof = solve_profile(cp, sc, 1);
        pt.converged = prof.converged;
        pt.iterations = prof.iterations;
        cp.T = prof.T;
        pt.profile = prof.T;

        SimConfig prod = spec.production;
        prod.seed = pt.seed;
        ObservableStats st = run(Chain(cp), prod, 1);
        interior_conductivity(st, spec.trim, pt);
        pt.config_hash = point_fingerprint(spec, T, pt.seed);
    });

    std::vector<FitPoint> fp;
    double tmin = 0, tmax = 0;
    for (const auto& p : res.points) {
        if (p.K > 0.0) {
            fp.push_back({p.T, p.K, p.K_err});
            tmin = fp.size() == 1 ? p.T : std::min(tmin, p.T);
            tmax = std::max(tmax, p.T);
        }
    }
    if (fp.size() >= 4 && tmax >= 4.0 * tmin) {
        res.fit = fit_exponent(fp, fit_seed);
        res.fitted = true;
    }
    return res;
}

} // namespace heatchain
