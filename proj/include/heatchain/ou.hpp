#pragma once

/** @file ou.hpp
 *  @brief Closed forms for the linearised single-site Ornstein-Uhlenbeck
 *         problem: propagator, stationary covariance, the discretised inverse
 *         covariance operator and its Fourier symbol.
 */

#include "errors.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <vector>

namespace heatchain {

struct OUParams {
    double zeta = 0.0;
    double M = 0.0;
    double T = 1.0;

    double alpha() const { return 0.5 * zeta; }

    void validate() const
    {
        require(std::isfinite(zeta) && zeta > 0.0, "zeta must be > 0");
        require(std::isfinite(M) && M > 0.0, "M must be > 0");
        require(std::isfinite(T) && T > 0.0, "T must be > 0");
    }
};

/// Drift matrix A with d(q,p) = -A (q,p) dt + noise.
inline Eigen::Matrix2d ou_drift(const OUParams& P)
{
    Eigen::Matrix2d A;
    A << 0.0, -1.0, P.M, P.zeta;
    return A;
}

/// exp(-tau A) = e^{-alpha tau}[ C(tau) I + S(tau) B ],  B = [[alpha, 1], [-M, -alpha]],
/// with C, S the cosh/sinh (overdamped) or cos/sin (underdamped) pair and the
/// critical case handled by its Taylor series.
inline Eigen::Matrix2d propagator(const OUParams& P, double tau)
{
    P.validate();
    require(tau >= 0.0, "tau must be >= 0");
    const double a = P.alpha();
    const double s = a * a - P.M; // rho^2
    double C, S;
    if (std::abs(s) * tau * tau < 1e-10) {
        C = 1.0 + 0.5 * s * tau * tau;
        S = tau * (1.0 + s * tau * tau / 6.0);
    } else if (s > 0.0) {
        double r = std::sqrt(s);
        C = std::cosh(r * tau);
        S = std::sinh(r * tau) / r;
    } else {
        double r = std::sqrt(-s);
        C = std::cos(r * tau);
        S = std::sin(r * tau) / r;
    }
    Eigen::Matrix2d B;
    B << a, 1.0, -P.M, -a;
    return std::exp(-a * tau) * (C * Eigen::Matrix2d::Identity() + S * B);
}

/// Stationary covariance of (q, p): diag(T/M, T).
inline Eigen::Matrix2d stationary_covariance(const OUParams& P)
{
    P.validate();
    Eigen::Matrix2d C = Eigen::Matrix2d::Zero();
    C(0, 0) = P.T / P.M;
    C(1, 1) = P.T;
    return C;
}

/// Coefficient c of the approximation 1/Dhat(p0) ~ M/(2 alpha) + (c/alpha)(1 - cos p0),
/// fixed by matching the curvature of the exact symbol at p0 = 0.
inline double curvature_c(const OUParams& P)
{
    P.validate();
    const double a = P.alpha();
    return (4.0 * a * a - 3.0 * P.M) / P.M;
}

/// Time-Laplacian weight c1 of the discrete inverse covariance, c1 = c / (2 alpha).
inline double fit_c1(const OUParams& P) { return curvature_c(P) / (2.0 * P.alpha()); }

/// Fourier transform of e^{-alpha|tau|} cos(rho~ tau) (underdamped or overdamped alike).
inline double dhat_exact(const OUParams& P, double p0)
{
    P.validate();
    const double a = P.alpha();
    const double u = P.M + p0 * p0;
    return 2.0 * a * u / (u * u - 4.0 * (P.M - a * a) * p0 * p0);
}

/// The symbol with numerator M + p0 instead of M + p0^2; kept for comparison only.
inline double dhat_printed(const OUParams& P, double p0)
{
    P.validate();
    const double a = P.alpha();
    const double u = P.M + p0 * p0;
    return 2.0 * a * (P.M + p0) / (u * u - 4.0 * (P.M - a * a) * p0 * p0);
}

/// Lattice approximation M/(2 alpha) + (c/alpha)(1 - cos p0) of 1/Dhat.
inline double dhat_inverse(const OUParams& P, double p0, double c)
{
    P.validate();
    const double a = P.alpha();
    return P.M / (2.0 * a) + (c / a) * (1.0 - std::cos(p0));
}

inline double dhat_inverse(const OUParams& P, double p0) { return dhat_inverse(P, p0, curvature_c(P)); }

/// Applies D^{-1} = Cinv (M/zeta I + c1 (-Laplacian)) to a time series of one
/// component (0 = q, 1 = p). The Laplacian has Dirichlet ends.
inline std::vector<double> dinv_apply(const OUParams& P, double c1, int component,
                                      const std::vector<double>& v)
{
    P.validate();
    require(component == 0 || component == 1, "component must be 0 (q) or 1 (p)");
    const double cinv = component == 0 ? P.M / P.T : 1.0 / P.T;
    const double diag = P.M / P.zeta;
    const std::size_t n = v.size();
    std::vector<double> out(n);
    for (std::size_t t = 0; t < n; ++t) {
        double lap = 2.0 * v[t];
        if (t > 0)
            lap -= v[t - 1];
        if (t + 1 < n)
            lap -= v[t + 1];
        out[t] = cinv * (diag * v[t] + c1 * lap);
    }
    return out;
}

/// Dense matrix of dinv_apply on n time slices.
inline Eigen::MatrixXd dinv_matrix(const OUParams& P, double c1, int component, std::size_t n)
{
    Eigen::MatrixXd D(n, n);
    std::vector<double> e(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        e.assign(n, 0.0);
        e[k] = 1.0;
        auto col = dinv_apply(P, c1, component, e);
        for (std::size_t t = 0; t < n; ++t)
            D(t, k) = col[t];
    }
    return D;
}

/// Smallest constant c with ||exp(-tau A)||_2 <= c e^{-alpha' tau} on a grid
/// of tau in [0, tau_max]. Requires 0 < alpha' < min(zeta/2, M/zeta).
inline double fit_norm_bound(const OUParams& P, double alpha_prime, double tau_max, std::size_t grid = 2000)
{
    P.validate();
    require(alpha_prime > 0.0 && alpha_prime < std::min(P.alpha(), P.M / P.zeta),
            "alpha' must lie in (0, min(zeta/2, M/zeta))");
    double c = 0.0;
    for (std::size_t i = 0; i <= grid; ++i) {
        double tau = tau_max * double(i) / double(grid);
        Eigen::JacobiSVD<Eigen::Matrix2d> svd(propagator(P, tau));
        c = std::max(c, svd.singularValues()(0) * std::exp(alpha_prime * tau));
    }
    return c;
}

/// Size of the off-diagonal (sine) part of the stationary correlation
/// exp(-tau A) C relative to its cosine part, integrated over tau in [0, inf)
/// with Frobenius norms. Small values mean the diagonal approximation is good.
inline double offdiag_audit(const OUParams& P, std::size_t grid = 4000)
{
    P.validate();
    const double a = P.alpha();
    const double s = a * a - P.M;
    const double tmax = 40.0 / a;
    const Eigen::Matrix2d C = stationary_covariance(P);
    Eigen::Matrix2d B;
    B << a, 1.0, -P.M, -a;
    double kept = 0.0, dropped = 0.0;
    for (std::size_t i = 0; i <= grid; ++i) {
        double tau = tmax * double(i) / double(grid);
        double Cc, Ss;
        if (std::abs(s) * tau * tau < 1e-10) {
            Cc = 1.0;
            Ss = tau;
        } else if (s > 0.0) {
            double r = std::sqrt(s);
            Cc = std::cosh(r * tau);
            Ss = std::sinh(r * tau) / r;
        } else {
            double r = std::sqrt(-s);
            Cc = std::cos(r * tau);
            Ss = std::sin(r * tau) / r;
        }
        double w = (i == 0 || i == grid) ? 0.5 : 1.0;
        kept += w * std::exp(-a * tau) * std::abs(Cc) * C.norm();
        dropped += w * std::exp(-a * tau) * std::abs(Ss) * (B * C).norm();
    }
    return dropped / kept;
}

} // namespace heatchain
