#pragma once

/** @file ssd.hpp
 *  @brief Single-cell distributions of the discrete-time representation,
 *         their product quadrature rules, moments and the moment bound
 *         constants K1..K5.
 *
 *  A cell carries psi = (q, p) with weight exp(-U),
 *    U = eg (a6 q^6 + a31 q^3 p + app p^2 + a4 q^4),
 *  eg = epsilon / gamma, epsilon = 1/zeta, gamma = 2 zeta T.
 */

#include "errors.hpp"
#include "ou.hpp"
#include "quadrature.hpp"

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/special_functions/hypergeometric_1F1.hpp>

#include <cmath>
#include <optional>
#include <vector>

namespace heatchain {

/// Physical parameters of the discrete-time representation.
struct PolymerParams {
    double zeta = 0.0;
    double M = 0.0;
    double lambda = 0.0;
    double J = 0.0;
    double p = 2.0;              ///< coupling decay exponent
    std::size_t range = 0;       ///< spatial coupling range, 0 = unlimited
    double T = 1.0;              ///< temperature used when T_sites is empty
    std::vector<double> T_sites; ///< optional per-site temperatures
    std::optional<double> c1;    ///< time-Laplacian weight; default from curvature matching

    void validate() const
    {
        require(std::isfinite(zeta) && zeta > 0.0, "zeta must be > 0");
        require(std::isfinite(M) && M > 0.0, "M must be > 0");
        require(std::isfinite(lambda) && lambda > 0.0, "lambda must be > 0");
        require(std::isfinite(J) && J >= 0.0, "J must be >= 0");
        require(p > 1.0, "coupling exponent p must exceed 1");
        require(T > 0.0, "T must be > 0");
        for (double t : T_sites)
            require(t > 0.0, "temperatures must be > 0");
    }

    double epsilon() const { return 1.0 / zeta; }
    double temperature(std::size_t site) const { return T_sites.empty() ? T : T_sites.at(site); }
    double gamma(std::size_t site) const { return 2.0 * zeta * temperature(site); }
    double eg(std::size_t site) const { return epsilon() / gamma(site); }
    double c1_value() const { return c1 ? *c1 : fit_c1(OUParams{zeta, M, T}); }
    double app() const { return M + 2.0 * zeta * c1_value(); }
    double lam13() const { return std::pow(lambda, -1.0 / 3.0); }
    double lam23() const { return std::pow(lambda, -2.0 / 3.0); }

    double coupling(std::size_t a, std::size_t b) const
    {
        if (a == b)
            return 0.0;
        std::size_t d = a > b ? a - b : b - a;
        if (range != 0 && d > range)
            return 0.0;
        return J / std::pow(double(d), p);
    }
};

enum class SsdKind { Interior, Initial, Final };

struct SsdSpec {
    SsdKind kind = SsdKind::Interior;
    double eg = 1.0;
    double a6 = 0.5;
    double a31 = 1.0;
    double app = 1.0;
    double a4 = 0.0;

    bool has_p() const { return kind != SsdKind::Final; }

    /// q^6 coefficient (inside eg) of the q-marginal after integrating p out.
    double b6() const { return has_p() ? a6 - a31 * a31 / (4.0 * app) : a6; }

    /// Coefficient (with eg) of the unpaired momentum carried by an initial cell.
    double unpaired_coeff() const { return kind == SsdKind::Initial ? eg * app : 0.0; }

    void validate() const
    {
        require(std::isfinite(eg) && eg > 0.0, "eg must be > 0");
        require(a6 > 0.0, "q^6 coefficient must be > 0");
        if (has_p()) {
            require(app > 0.0, "p^2 coefficient must be > 0");
            require(b6() > 0.0, "distribution not normalisable: a6 - a31^2/(4 app) must be > 0");
        }
    }
};

/// Cell distribution for a site at time slice kind `kind`. Final cells carry q
/// only with weight exp(-eg (q^6 + lambda^{-1/3} M q^4)); initial cells carry
/// the interior weight plus an independent Gaussian for the unpaired momentum.
inline SsdSpec make_ssd(const PolymerParams& P, std::size_t site, SsdKind kind)
{
    P.validate();
    SsdSpec s;
    s.kind = kind;
    s.eg = P.eg(site);
    s.a4 = P.lam13() * P.M;
    if (kind == SsdKind::Final) {
        s.a6 = 1.0;
        s.a31 = 0.0;
        s.app = 0.0;
    } else {
        s.a6 = 0.5;
        s.a31 = 1.0;
        s.app = P.app();
    }
    s.validate();
    return s;
}

inline double ssd_U(const SsdSpec& s, double q, double p)
{
    double q2 = q * q;
    if (!s.has_p())
        return s.eg * (s.a6 * q2 * q2 * q2 + s.a4 * q2 * q2);
    return s.eg * (s.a6 * q2 * q2 * q2 + s.a31 * q2 * q * p + s.app * p * p + s.a4 * q2 * q2);
}

/// Unnormalised weight exp(-U); `unpaired` is the extra momentum of an initial cell.
inline double ssd_weight(const SsdSpec& s, double q, double p, double unpaired = 0.0)
{
    s.validate();
    return std::exp(-ssd_U(s, q, p) - s.unpaired_coeff() * unpaired * unpaired);
}

namespace detail {

/// eg (b6 q^6 + a4 q^4): exponent of the q-marginal.
inline double marginal_exponent(const SsdSpec& s, double q)
{
    double q2 = q * q;
    return s.eg * (s.b6() * q2 * q2 * q2 + s.a4 * q2 * q2);
}

inline double support_radius(const SsdSpec& s)
{
    double R = std::pow(745.0 / (s.eg * s.b6()), 1.0 / 6.0);
    if (s.a4 < 0.0)
        R = std::max(R, std::pow(4.0 * -s.a4 / s.b6(), 0.5) + R);
    return R;
}

inline double marginal_minimum(const SsdSpec& s)
{
    if (s.a4 >= 0.0)
        return 0.0;
    double u = -2.0 * s.a4 / (3.0 * s.b6()); // q^2 at the minimum
    return std::min(0.0, s.eg * (s.b6() * u * u * u + s.a4 * u * u));
}

/// E|X|^beta for X ~ N(mu, sigma^2).
inline double gaussian_abs_moment(double mu, double sigma, double beta)
{
    if (beta == 0.0)
        return 1.0;
    double z = -mu * mu / (2.0 * sigma * sigma);
    return std::pow(sigma, beta) * std::pow(2.0, 0.5 * beta) * boost::math::tgamma(0.5 * (beta + 1.0)) /
           std::sqrt(M_PI) * boost::math::hypergeometric_1F1(-0.5 * beta, 0.5, z);
}

} // namespace detail

/// Tensor-product rule for one cell: nodes (q_k, p_k) with weights summing to one.
struct CellRule {
    std::vector<double> q, p, w;
    bool has_p = true;
    std::size_t size() const { return w.size(); }
};

/// Gauss rule for the q-marginal (m_q nodes) times a Gauss-Hermite rule for
/// p given q (m_p nodes), which is Gaussian with mean -a31 q^3 / (2 app).
inline CellRule build_cell_rule(const SsdSpec& s, std::size_t m_q, std::size_t m_p)
{
    s.validate();
    require(m_q >= 1 && m_p >= 1, "rule needs at least one node per axis");
    const double R = detail::support_radius(s);
    const double emin = detail::marginal_minimum(s);
    Rule1D rq = gauss_for_weight(
        [&](double q) { return std::exp(-(detail::marginal_exponent(s, q) - emin)); }, R, m_q,
        std::max<std::size_t>(4001, 64 * m_q + 1));
    CellRule c;
    c.has_p = s.has_p();
    double total = 0.0;
    if (!s.has_p()) {
        for (std::size_t i = 0; i < rq.size(); ++i) {
            c.q.push_back(rq.x[i]);
            c.p.push_back(0.0);
            c.w.push_back(rq.w[i]);
            total += rq.w[i];
        }
    } else {
        Rule1D gh = gauss_hermite(m_p);
        const double scale = 1.0 / std::sqrt(s.eg * s.app); // p = mu + scale * x for weight e^{-x^2}
        for (std::size_t i = 0; i < rq.size(); ++i) {
            double q = rq.x[i];
            double mu = -s.a31 * q * q * q / (2.0 * s.app);
            for (std::size_t k = 0; k < gh.size(); ++k) {
                c.q.push_back(q);
                c.p.push_back(mu + scale * gh.x[k]);
                double w = rq.w[i] * gh.w[k];
                c.w.push_back(w);
                total += w;
            }
        }
    }
    for (double& w : c.w)
        w /= total;
    return c;
}

/// Constants of the two-sided bounds
///   eg [b6 q^6 + a4 q^4] <= K1 q^6 + K2,
///   U - P(q, p) >= K3 q^6 + K4 p^2 + K5,
/// with P = Pq2 q^2 + Pq4 q^4 + Pp2 p^2.
struct MomentConstants {
    double K1 = 0, K2 = 0, K3 = 0, K4 = 0, K5 = 0;
    double C1 = 0, C2 = 0;      ///< q^4 and p^2 coefficients of P
    bool hypothesis_ok = false; ///< C1 < eg a6/3 and C2 < eg (app - 3 a31^2/(8 a6))
    bool feasible = false;      ///< K3 > 0 and K4 > 0 were found
};

struct StabilityPoly {
    double q2 = 0.0, q4 = 0.0, p2 = 0.0;
};

namespace detail {

template <class F>
double golden_min(F&& f, double lo, double hi, int iters = 80)
{
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = lo, b = hi;
    double c = b - g * (b - a), d = a + g * (b - a);
    double fc = f(c), fd = f(d);
    for (int i = 0; i < iters; ++i) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

/// inf_{u >= 0} A u^3 + B u^2 - C u, with A > 0, C >= 0.
inline double cubic_inf(double A, double B, double C)
{
    double disc = std::sqrt(4.0 * B * B + 12.0 * A * C);
    double u = B >= 0.0 ? (disc > 0.0 ? 2.0 * C / (2.0 * B + disc) : 0.0) : (-2.0 * B + disc) / (6.0 * A);
    double g = A * u * u * u + B * u * u - C * u;
    return std::min(0.0, g);
}

} // namespace detail

/// Optimised constants for the moment weights (alpha, beta): minimises the
/// logarithm of the resulting moment bound.
inline MomentConstants moment_constants(const SsdSpec& s, const StabilityPoly& P, double alpha = 0.0,
                                        double beta = 0.0)
{
    s.validate();
    require(s.has_p(), "moment constants need a cell with momentum");
    MomentConstants k;
    k.C1 = P.q4;
    k.C2 = P.p2;
    k.hypothesis_ok = P.q4 < s.eg * s.a6 / 3.0 && P.p2 < s.eg * (s.app - 3.0 * s.a31 * s.a31 / (8.0 * s.a6));

    // upper bound on the q-marginal exponent
    const double b6 = s.b6();
    if (s.a4 <= 0.0) {
        k.K1 = s.eg * b6;
        k.K2 = 0.0;
    } else {
        auto K2of = [&](double th) { return s.eg * 4.0 * s.a4 * s.a4 * s.a4 / (27.0 * th * th * b6 * b6); };
        auto obj = [&](double lt) {
            double th = std::exp(lt);
            return K2of(th) + std::log(s.eg * b6 * (1.0 + th)) / 6.0;
        };
        double th = std::exp(detail::golden_min(obj, -30.0, 30.0));
        k.K1 = s.eg * b6 * (1.0 + th);
        k.K2 = K2of(th);
    }

    // lower bound on U - P
    const double smin = s.a31 * s.a31 / (4.0 * s.a6 * s.app);
    auto eval = [&](double sv, double tp, MomentConstants& out) {
        double c6 = s.eg * (s.a6 - s.a31 * s.a31 / (4.0 * sv * s.app));
        out.K3 = tp * c6;
        out.K4 = s.eg * (1.0 - sv) * s.app - P.p2;
        out.K5 = detail::cubic_inf((1.0 - tp) * c6, s.eg * s.a4 - P.q4, P.q2);
        if (!(out.K3 > 0.0 && out.K4 > 0.0))
            return 1e300;
        return -out.K5 - (1.0 + alpha) / 6.0 * std::log(out.K3) - (1.0 + beta) / 2.0 * std::log(out.K4);
    };
    MomentConstants tmp = k;
    auto inner = [&](double sv) {
        double tp = detail::golden_min([&](double t) { return eval(sv, t, tmp); }, 1e-9, 1.0 - 1e-9, 60);
        return std::make_pair(tp, eval(sv, tp, tmp));
    };
    double lo = smin * (1.0 + 1e-12), hi = 1.0 - 1e-12;
    if (lo < hi) {
        double sv = detail::golden_min([&](double x) { return inner(x).second; }, lo, hi, 60);
        double tp = inner(sv).first;
        double v = eval(sv, tp, k);
        k.feasible = v < 1e299;
    }
    return k;
}

/// Upper bound on  int dnu e^{P} |q|^alpha |p|^beta  from the constants.
inline double moment_bound(const SsdSpec& s, const MomentConstants& k, double alpha, double beta)
{
    using boost::math::tgamma;
    if (!k.feasible)
        return INFINITY;
    double inv_norm = std::exp(k.K2) * std::pow(k.K1, 1.0 / 6.0) * std::sqrt(s.eg * s.app) /
                      (2.0 * std::sqrt(M_PI) * tgamma(7.0 / 6.0));
    double integral = std::exp(-k.K5) / 3.0 * std::pow(k.K3, -(1.0 + alpha) / 6.0) *
                      std::pow(k.K4, -(1.0 + beta) / 2.0) * tgamma((1.0 + alpha) / 6.0) *
                      tgamma((1.0 + beta) / 2.0);
    return inv_norm * integral;
}

struct MomentResult {
    double value = 0.0;
    double error = 0.0;  ///< quadrature error estimate
    double bound = 0.0;  ///< analytic upper bound (infinite for final cells)
};

/// Normalised moment  int dnu |q|^alpha |p|^beta  by adaptive tanh-sinh
/// quadrature of the q-marginal (levels double the node count; the error is
/// the difference between the last two levels).
inline MomentResult ssd_moment(const SsdSpec& s, double alpha, double beta)
{
    s.validate();
    require(alpha >= 0.0 && beta >= 0.0, "moment exponents must be >= 0");
    require(s.has_p() || beta == 0.0, "final cells carry no momentum");
    const double R = detail::support_radius(s);
    const double emin = detail::marginal_minimum(s);
    const double sigma = s.has_p() ? 1.0 / std::sqrt(2.0 * s.eg * s.app) : 0.0;
    boost::math::quadrature::tanh_sinh<double> ts;
    auto wq = [&](double q) { return std::exp(-(detail::marginal_exponent(s, q) - emin)); };
    double e0 = 0.0, e1 = 0.0;
    double Z = ts.integrate(wq, 0.0, R, 1e-14, &e0);
    double N = ts.integrate(
        [&](double q) {
            double v = wq(q) * (alpha == 0.0 ? 1.0 : std::pow(q, alpha));
            if (beta != 0.0) {
                double mu = -s.a31 * q * q * q / (2.0 * s.app);
                v *= detail::gaussian_abs_moment(mu, sigma, beta);
            }
            return v;
        },
        0.0, R, 1e-14, &e1);
    MomentResult r;
    r.value = N / Z;
    r.error = std::abs(r.value) * (e0 / Z + (N != 0.0 ? e1 / std::abs(N) : 0.0)) + 1e-15 * std::abs(r.value);
    if (s.has_p()) {
        MomentConstants k = moment_constants(s, StabilityPoly{}, alpha, beta);
        r.bound = moment_bound(s, k, alpha, beta);
    } else {
        r.bound = INFINITY;
    }
    return r;
}

/// Same moment from a cell rule (used to validate rules).
inline double rule_moment(const CellRule& c, double alpha, double beta)
{
    double s = 0.0;
    for (std::size_t k = 0; k < c.size(); ++k)
        s += c.w[k] * std::pow(std::abs(c.q[k]), alpha) * std::pow(std::abs(c.p[k]), beta);
    return s;
}

} // namespace heatchain
