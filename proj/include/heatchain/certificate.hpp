#pragma once

/** @file certificate.hpp
 *  @brief Kotecky-Preiss convergence certificate for the polymer expansion,
 *         stability polynomial, decay kernels and lattice sum constants.
 *
 *  Bounds chain used by kp_check():
 *    |rho(R)| <= int prod dnu e^{sum P} sum_trees prod |G|      (tree-graph bound)
 *    each |G_xy| is a sum of eight monomial classes; rescaling q by K3^{-1/6}
 *    and p by K4^{-1/2} turns every class into a dimensionless ceiling A^
 *    times a monomial in the rescaled variables, whose moments are bounded
 *    by v^ Gamma(d) at a vertex of tree degree d.
 *  Summing over trees and polymers containing a fixed cell gives
 *    sup_x sum_{R ni x} |rho(R)| e^{|R|} <= c eps / (1 - eps),
 *    eps = 4 e v^ O(1) K^,   c = e v^ / 2,
 *  with O(1) K^ the supremum of the rescaled row sums.
 */

#include "ssd.hpp"
#include "polymer.hpp"

#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/special_functions/zeta.hpp>

#include <array>
#include <cmath>
#include <string>
#include <vector>

namespace heatchain {

/// F^{(w)}_{xy} = e^{-w |t_x - t_y|} [ (1 - delta) / |s_x - s_y|^p + delta ].
inline double decay_kernel(double w, Cell x, Cell y, double p)
{
    double dt = std::abs(double(x.t) - double(y.t));
    double ds = std::abs(double(x.s) - double(y.s));
    return std::exp(-w * dt) * (ds == 0.0 ? 1.0 : std::pow(ds, -p));
}

/// sup over time offsets of sum_t e^{-w1|t| - w2|D-t|} / e^{-w1|D|}  (w1 < w2).
inline double time_convolution_constant(double w1, double w2, std::size_t max_offset = 400)
{
    require(w1 > 0.0 && w2 > w1, "need 0 < w1 < w2");
    const double g = std::exp(-(w1 + w2));
    double best = (1.0 + g) / (1.0 - g);
    for (std::size_t D = 1; D <= max_offset; ++D) {
        double left = std::exp((w1 - w2) * double(D)) / (1.0 - g);
        double mid = 0.0;
        for (std::size_t u = 1; u < D; ++u)
            mid += std::exp(-(w2 - w1) * double(u));
        double right = 1.0 / (1.0 - g);
        best = std::max(best, left + mid + right);
    }
    return best;
}

/// sup_d sum_k s(k) s(d-k) / s(d), s(j) = |j|^{-p}, s(0) = 1; with
/// `exclude_ends` the terms k = 0 and k = d are dropped. The k-sum is cut at
/// |k| <= 20000 with an integral bound for the tail, and the large-d limit is
/// included in the supremum.
inline double space_convolution_constant(double p, bool exclude_ends = false, long max_d = 1024)
{
    require(p > 1.0, "p must exceed 1");
    const long kmax = 20000;
    std::vector<double> sp(std::size_t(kmax + max_d + 1));
    sp[0] = 1.0;
    for (std::size_t k = 1; k < sp.size(); ++k)
        sp[k] = std::pow(double(k), -p);
    auto at = [&](long d) {
        double s = 0.0;
        for (long k = -kmax; k <= kmax; ++k) {
            if (exclude_ends && (k == 0 || k == d))
                continue;
            s += sp[std::size_t(std::abs(k))] * sp[std::size_t(std::abs(d - k))];
        }
        double a = double(kmax) - double(d);
        s += 2.0 * std::pow(a, 1.0 - 2.0 * p) / (2.0 * p - 1.0);
        return s / sp[std::size_t(d)];
    };
    double best = 0.0;
    for (long d = exclude_ends ? 1 : 0; d <= max_d; d = d < 16 ? d + 1 : d * 2)
        best = std::max(best, at(d));
    double z = boost::math::zeta(p);
    best = std::max(best, exclude_ends ? 4.0 * z : 2.0 * (1.0 + 2.0 * z));
    return best;
}

/// sum_{y != x} F^{(1)}_{xy} on the infinite lattice.
inline double row_sum_constant(double p)
{
    double e = std::exp(-1.0);
    return (1.0 + e) / (1.0 - e) * (1.0 + 2.0 * boost::math::zeta(p)) - 1.0;
}

/// Finite-box check of sum_{z != x,y} F^{w1}_{xz} F^{w2}_{zy} <= O F^{w1}_{xy}; returns the worst ratio.
inline double convolution_ratio_on_box(double w1, double w2, double p, std::size_t slices, std::size_t sites)
{
    double worst = 0.0;
    for (std::size_t a = 0; a < slices * sites; ++a)
        for (std::size_t b = 0; b < slices * sites; ++b) {
            Cell x{a / sites, a % sites}, y{b / sites, b % sites};
            double s = 0.0;
            for (std::size_t c = 0; c < slices * sites; ++c) {
                if (c == a || c == b)
                    continue;
                Cell z{c / sites, c % sites};
                s += decay_kernel(w1, x, z, p) * decay_kernel(w2, z, y, p);
            }
            worst = std::max(worst, s / decay_kernel(w1, x, y, p));
        }
    return worst;
}

/// V_x = P(psi_x) majorising the pair interaction of cell x, from the pair
/// coefficients of a finite lattice (Young's inequality per monomial).
inline StabilityPoly stability_poly(const PolymerEngine& E, std::size_t x)
{
    StabilityPoly P;
    const std::size_t n = E.lattice().size();
    for (std::size_t y = 0; y < n; ++y) {
        if (y == x)
            continue;
        const PairCoeffs& c = E.coeffs(x, y);
        P.q2 += 0.5 * std::abs(c.qq) + 0.5 * std::abs(c.qp);
        P.p2 += 0.5 * std::abs(c.pq) + 0.5 * std::abs(c.pp);
        P.q4 += 0.75 * std::abs(c.q3q) + 0.25 * std::abs(c.qq3);
    }
    return P;
}

inline double stability_value(const StabilityPoly& P, double q, double p)
{
    return P.q2 * q * q + P.q4 * q * q * q * q + P.p2 * p * p;
}

struct KpCertificate {
    std::array<double, 6> A{};     ///< printed per-kind ceilings A_1..A_6
    double K = 0.0;                ///< max A_s
    std::array<double, 8> Ahat{};  ///< rescaled monomial-class ceilings per unit coupling row
    double Khat = 0.0;             ///< max over classes of the rescaled per-link ceiling
    double O1 = 0.0;               ///< rescaled row sum / Khat
    double K1 = 0, K2 = 0, K3 = 0, K4 = 0, K5 = 0, K6 = 0;
    double C1 = 0, C2 = 0;
    bool hypothesis_ok = false;
    double v_hat = 0.0;            ///< vertex factor
    double eps = 0.0;              ///< eps(K) = 4 e v^ O(1) K^
    double c = 0.0;                ///< prefactor e v^ / 2
    double kp_sum = 0.0;           ///< bound on sup_x sum_{R ni x} |rho(R)| e^{|R|}
    double margin = 0.0;           ///< 1 - kp_sum
    bool pass = false;
    std::string reason;
    double eps_literal = 0.0;      ///< eps(K) from the unrescaled K-tilde form (reference only)
    double conv_time = 0.0;        ///< time convolution constant, w1 = 2/3, w2 = 1
    double conv_space = 0.0;       ///< space convolution constant
    double m_prime = 0.0;          ///< decay rate (-log eps + 1/2) / epsilon
    StabilityPoly P;               ///< stability polynomial of an interior cell
};

/// sup over d >= 1 and integer n <= 3d, m <= d, n + m >= d of
/// Gamma((1+n)/6) Gamma((1+m)/2) / Gamma(d).
inline double gamma_ratio_constant(std::size_t max_d = 400)
{
    using boost::math::lgamma;
    // log Gamma is convex, so the maximum over the polytope sits at a vertex
    double best = 0.0;
    for (std::size_t d = 1; d <= max_d; ++d) {
        const double D = double(d);
        const double verts[4][2] = {{D, 0.0}, {3.0 * D, 0.0}, {0.0, D}, {3.0 * D, D}};
        for (const auto& v : verts)
            best = std::max(best, std::exp(lgamma((1.0 + v[0]) / 6.0) + lgamma((1.0 + v[1]) / 2.0) - lgamma(D)));
    }
    return best;
}

/// Certificate for the infinite lattice with temperatures >= P.T.
inline KpCertificate kp_check(const PolymerParams& P)
{
    P.validate();
    using boost::math::tgamma;
    KpCertificate C;
    double Tmin = P.T;
    for (double t : P.T_sites)
        Tmin = std::min(Tmin, t);
    const double egm = P.epsilon() / (2.0 * P.zeta * Tmin); // largest eg
    const double c1 = std::abs(P.c1_value());
    const double l13 = P.lam13(), l23 = P.lam23();
    const double z = boost::math::zeta(P.p);
    double rowJ = 0.0; // sum_{d != 0} J_d
    if (P.range == 0)
        rowJ = 2.0 * P.J * z;
    else
        for (std::size_t d = 1; d <= P.range; ++d)
            rowJ += 2.0 * P.J * std::pow(double(d), -P.p);
    const double conv_ex = space_convolution_constant(P.p, true);
    C.conv_space = space_convolution_constant(P.p, false);
    C.conv_time = time_convolution_constant(2.0 / 3.0, 1.0);

    // printed ceilings
    C.A[0] = egm * P.J * l13;
    C.A[1] = egm * P.J * l23 * P.M;
    C.A[2] = egm * l23 / 4.0 * P.J * P.J * conv_ex;
    C.A[3] = egm * P.J * l13;
    C.A[4] = 2.0 * egm * l23 * P.M * (1.0 + 3.0 * c1);
    C.A[5] = egm * P.zeta * c1;
    C.K = *std::max_element(C.A.begin(), C.A.end());

    // stability polynomial of an interior cell (two time neighbours)
    const double a5 = 2.0 * egm * l23 * P.M * c1; // ordered time-neighbour q q kernel
    const double a6 = egm * P.zeta * c1;          // ordered time-neighbour p p kernel
    const double row1 = egm * l13 * rowJ;
    const double row2 = egm * l23 * P.M * rowJ;
    const double row3 = egm * l23 / 4.0 * rowJ * rowJ;
    const double row4 = egm * l13 * rowJ;
    C.P.q2 = 0.5 * row1 + row2 + row3 + 2.0 * a5;
    C.P.q4 = row4;
    C.P.p2 = 0.5 * row1 + 2.0 * a6;

    SsdSpec s;
    s.kind = SsdKind::Interior;
    s.eg = egm;
    s.a6 = 0.5;
    s.a31 = 1.0;
    s.app = P.app();
    s.a4 = l13 * P.M;
    if (!(s.app > 0.0 && s.b6() > 0.0)) {
        C.reason = "single-cell weight not normalisable (M + 2 zeta c1 too small)";
        return C;
    }
    SsdSpec sf = s;
    sf.kind = SsdKind::Final;
    sf.a6 = 1.0;
    sf.a31 = 0.0;
    sf.app = 0.0;

    C.K6 = gamma_ratio_constant();
    const double O1lit = std::max(C.conv_time * C.conv_space, row_sum_constant(P.p));

    double best_score = INFINITY;
    bool any = false;
    KpCertificate best = C;
    for (double wa : {0.0, 1.0, 2.0, 3.0, 6.0})
        for (double wb : {0.0, 1.0, 2.0}) {
            KpCertificate T = C;
            MomentConstants k = moment_constants(s, C.P, wa, wb);
            T.C1 = k.C1;
            T.C2 = k.C2;
            T.hypothesis_ok = k.hypothesis_ok;
            if (!k.feasible)
                continue;
            T.K1 = k.K1;
            T.K2 = k.K2;
            T.K3 = k.K3;
            T.K4 = k.K4;
            T.K5 = k.K5;
            const double q1 = std::pow(k.K3, -1.0 / 6.0), p1 = std::pow(k.K4, -0.5);
            // rescaled classes: q p, p q, q q (x2 orientations), q^3 q, q q^3, time q q, time p p
            T.Ahat = {egm * l13 * q1 * p1,              // q_x p_y per unit J_xy
                      egm * l13 * q1 * p1,              // p_x q_y
                      2.0 * egm * l23 * P.M * q1 * q1,  // kind 2, both orientations
                      2.0 * egm * l23 / 4.0 * q1 * q1,  // kind 3 per unit sum_k J J
                      egm * l13 * q1 * q1 * q1 * q1,    // q_x^3 q_y
                      egm * l13 * q1 * q1 * q1 * q1,    // q_x q_y^3
                      2.0 * a5 * q1 * q1,               // time q q
                      2.0 * a6 * p1 * p1};              // time p p
            // per-link ceilings (couplings at distance 1 for the J classes)
            std::array<double, 8> link = {T.Ahat[0] * P.J, T.Ahat[1] * P.J, T.Ahat[2] * P.J,
                                          T.Ahat[3] * P.J * P.J * conv_ex, T.Ahat[4] * P.J,
                                          T.Ahat[5] * P.J, T.Ahat[6], T.Ahat[7]};
            T.Khat = *std::max_element(link.begin(), link.end());
            double row = (T.Ahat[0] + T.Ahat[1] + T.Ahat[2] + T.Ahat[4] + T.Ahat[5]) * rowJ +
                         T.Ahat[3] * rowJ * rowJ + 2.0 * (T.Ahat[6] + T.Ahat[7]);
            T.O1 = T.Khat > 0.0 ? row / T.Khat : 0.0;

            const double v0 = std::exp(k.K2 - k.K5) * std::pow(k.K1, 1.0 / 6.0) * std::sqrt(egm * s.app) /
                              (6.0 * std::sqrt(M_PI) * tgamma(7.0 / 6.0));
            double vhat = v0 * std::pow(k.K3, -1.0 / 6.0) * std::pow(k.K4, -0.5) * T.K6;
            // final cells: q-only weight, no momentum powers
            MomentConstants kf;
            {
                double b6f = sf.a6;
                double a4 = sf.a4;
                double th = 1.0;
                kf.K1 = egm * b6f * (1.0 + th);
                kf.K2 = a4 > 0.0 ? egm * 4.0 * a4 * a4 * a4 / (27.0 * th * th * b6f * b6f) : 0.0;
                double Pq2f = 0.5 * row1 + row2 + row3 + a5, Pq4f = row4;
                kf.K3 = 0.5 * egm * b6f;
                kf.K5 = detail::cubic_inf(0.5 * egm * b6f, egm * a4 - Pq4f, Pq2f);
                double v0f = std::exp(kf.K2 - kf.K5) * std::pow(kf.K1, 1.0 / 6.0) / (6.0 * tgamma(7.0 / 6.0));
                double vf = v0f * std::pow(kf.K3, -1.0 / 6.0) * T.K6 / std::sqrt(M_PI);
                if (kf.K3 < k.K3)
                    vf = INFINITY; // rescaling by the interior K3 would not dominate
                vhat = std::max(vhat, vf);
            }
            T.v_hat = vhat;
            T.eps = 4.0 * M_E * vhat * row;
            T.c = M_E * vhat / 2.0;
            T.kp_sum = T.eps < 1.0 ? T.c * T.eps / (1.0 - T.eps) : INFINITY;
            T.margin = 1.0 - T.kp_sum;
            double Kt3 = std::min(1.0, std::sqrt(k.K3)), Kt4 = std::min(1.0, std::sqrt(k.K4));
            T.eps_literal = 8.0 * std::sqrt(egm) * std::exp(2.0 + k.K2 - k.K5) * std::pow(k.K1, 1.0 / 6.0) *
                            std::sqrt(s.app) * T.K6 * O1lit * C.K /
                            (std::pow(k.K3, 1.0 / 6.0) * std::sqrt(k.K4) * Kt3 * Kt3 * Kt4 * Kt4);
            double score = T.eps < 1.0 ? T.kp_sum : 1e100 + T.eps;
            if (!any || score < best_score) {
                best_score = score;
                best = T;
                any = true;
            }
        }
    if (!any) {
        best.reason = "no admissible K3, K4 > 0: stability polynomial too large";
        best.pass = false;
        return best;
    }
    best.m_prime = (-std::log(best.eps) + 0.5) / P.epsilon();
    if (!best.hypothesis_ok) {
        best.pass = false;
        best.reason = "moment-bound hypothesis violated (C1 or C2 too large)";
    } else if (best.eps >= 1.0) {
        best.pass = false;
        best.reason = "eps(K) >= 1";
    } else if (best.margin <= 0.0) {
        best.pass = false;
        best.reason = "Kotecky-Preiss sum exceeds 1";
    } else {
        best.pass = true;
        best.reason = "ok";
    }
    return best;
}

/// Decay rate of the truncated correlations implied by eps(K).
inline double decay_rate(double eps, double epsilon) { return (-std::log(eps) + 0.5) / epsilon; }

} // namespace heatchain
