#pragma once

/** @file polymer.hpp
 *  @brief Cluster expansion on a finite lattice of cells: link kernels,
 *         polymer activities, truncated series for log Xi and the truncated
 *         two-point function.
 *
 *  Cells x = (t, s) sit on `slices` time slices and `sites` chain sites. Each
 *  cell carries psi_x = (q_x, p_x) distributed by its single-cell weight; cells
 *  interact through pair factors e^{G_xy}. G_xy is minus the sum over the six
 *  link kinds of the ordered kernels for (x, y) and (y, x).
 */

#include "graphs.hpp"
#include "parallel.hpp"
#include "ssd.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <tuple>
#include <vector>

namespace heatchain {

struct Cell {
    std::size_t t = 0; ///< time slice, in units of epsilon
    std::size_t s = 0; ///< site
    bool operator==(const Cell&) const = default;
};

struct Lattice {
    std::size_t slices = 1;
    std::size_t sites = 1;
    bool boundary_measures = true; ///< first/last slice use the initial/final cell weights

    std::size_t size() const { return slices * sites; }
    std::size_t index(Cell c) const { return c.t * sites + c.s; }
    Cell cell(std::size_t i) const { return {i / sites, i % sites}; }

    SsdKind kind(std::size_t i) const
    {
        if (!boundary_measures || slices < 2)
            return SsdKind::Interior;
        std::size_t t = i / sites;
        if (t == 0)
            return SsdKind::Initial;
        if (t + 1 == slices)
            return SsdKind::Final;
        return SsdKind::Interior;
    }

    void validate() const
    {
        require(slices >= 1 && sites >= 1, "lattice must have at least one cell");
        require(size() <= 24, "lattice too large for subset enumeration (max 24 cells)");
    }
};

/// A single ordered kernel  coeff * q_x^{qx} p_x^{px} q_y^{qy} p_y^{py}.
struct LinkWeight {
    double coeff = 0.0;
    int qx = 0, px = 0, qy = 0, py = 0;
};

/// Ordered kernel of kind k (1..6) from cell x to cell y. For kind 5 with
/// x == y the stencil centre is returned.
inline LinkWeight link_weight(const PolymerParams& P, const Lattice& L, int kind, Cell x, Cell y)
{
    P.validate();
    require(kind >= 1 && kind <= 6, "link kind must be in 1..6");
    require(x.s < L.sites && y.s < L.sites && x.t < L.slices && y.t < L.slices, "cell outside lattice");
    const double eg = P.eg(x.s);
    const bool same_t = x.t == y.t, same_s = x.s == y.s;
    const std::size_t dt = x.t > y.t ? x.t - y.t : y.t - x.t;
    const double Jxy = P.coupling(x.s, y.s);
    LinkWeight w;
    switch (kind) {
    case 1: // q_x p_y
        w = {same_t && !same_s ? eg * Jxy * P.lam13() : 0.0, 1, 0, 0, 1};
        break;
    case 2: // q_x q_y
        w = {same_t && !same_s ? eg * Jxy * P.lam23() * P.M : 0.0, 1, 0, 1, 0};
        break;
    case 3: { // q_x q_y, second order in J through an intermediate site
        double s = 0.0;
        if (same_t && !same_s)
            for (std::size_t k = 0; k < L.sites; ++k)
                if (k != x.s && k != y.s)
                    s += P.eg(k) * P.lam23() / 4.0 * P.coupling(x.s, k) * P.coupling(k, y.s);
        w = {s, 1, 0, 1, 0};
        break;
    }
    case 4: // q_x^3 q_y
        w = {same_t && !same_s ? eg * Jxy * P.lam13() : 0.0, 3, 0, 1, 0};
        break;
    case 5: { // q_x q_y along time, stencil delta - c1 Laplacian
        double st = 0.0;
        if (same_s) {
            if (dt == 0)
                st = 1.0 + 2.0 * P.c1_value();
            else if (dt == 1)
                st = -P.c1_value();
        }
        w = {2.0 * eg * P.lam23() * P.M * st, 1, 0, 1, 0};
        break;
    }
    case 6: // p_x p_y between neighbouring slices
        w = {same_s && dt == 1 ? -eg * P.zeta * P.c1_value() : 0.0, 0, 1, 0, 1};
        break;
    }
    return w;
}

/// Coefficients of G_xy as a polynomial in (psi_x, psi_y):
/// G = -(qq q_x q_y + qp q_x p_y + pq p_x q_y + q3q q_x^3 q_y + qq3 q_x q_y^3 + pp p_x p_y).
struct PairCoeffs {
    double qq = 0, qp = 0, pq = 0, q3q = 0, qq3 = 0, pp = 0;

    bool nonzero() const { return qq != 0 || qp != 0 || pq != 0 || q3q != 0 || qq3 != 0 || pp != 0; }

    double G(double qx, double px, double qy, double py) const
    {
        return -(qq * qx * qy + qp * qx * py + pq * px * qy + q3q * qx * qx * qx * qy +
                 qq3 * qx * qy * qy * qy + pp * px * py);
    }
};

inline PairCoeffs pair_coeffs(const PolymerParams& P, const Lattice& L, Cell x, Cell y)
{
    PairCoeffs c;
    if (x == y)
        return c;
    for (int k = 1; k <= 6; ++k) {
        for (int dir = 0; dir < 2; ++dir) {
            LinkWeight w = dir == 0 ? link_weight(P, L, k, x, y) : link_weight(P, L, k, y, x);
            if (w.coeff == 0.0)
                continue;
            // express in (x, y) orientation
            int qx = dir == 0 ? w.qx : w.qy, px = dir == 0 ? w.px : w.py;
            int qy = dir == 0 ? w.qy : w.qx, py = dir == 0 ? w.py : w.px;
            if (qx == 1 && qy == 1)
                c.qq += w.coeff;
            else if (qx == 1 && py == 1)
                c.qp += w.coeff;
            else if (px == 1 && qy == 1)
                c.pq += w.coeff;
            else if (qx == 3 && qy == 1)
                c.q3q += w.coeff;
            else if (qx == 1 && qy == 3)
                c.qq3 += w.coeff;
            else if (px == 1 && py == 1)
                c.pp += w.coeff;
        }
    }
    // final cells carry no momentum
    if (L.kind(L.index(x)) == SsdKind::Final)
        c.pq = c.pp = 0.0;
    if (L.kind(L.index(y)) == SsdKind::Final)
        c.qp = c.pp = 0.0;
    return c;
}

struct QuadLevel {
    std::size_t m_q = 16;
    std::size_t m_p = 8;
    bool operator<(const QuadLevel& o) const { return m_q != o.m_q ? m_q < o.m_q : m_p < o.m_p; }
    QuadLevel halved() const { return {std::max<std::size_t>(2, m_q / 2), std::max<std::size_t>(1, m_p / 2)}; }
};

struct EngineOptions {
    /// If set, every activity uses this level; otherwise the level is chosen by polymer size.
    std::optional<QuadLevel> fixed_level;
    unsigned workers = 1;
    bool error_estimate = true; ///< also evaluate at the halved level
};

/// Per-size default levels keep the tensor sums near 10^7 points.
inline QuadLevel default_level(std::size_t n)
{
    switch (n) {
    case 1:
    case 2: return {32, 16};
    case 3: return {16, 8};
    case 4: return {10, 5};
    default: return {8, 4};
    }
}

/// Which cells carry an observable insertion, and which component (0 = q, 1 = p).
struct Insertion {
    std::size_t cell = 0;
    int component = 0;
};

struct ActivityResult {
    double rho = 0.0;    ///< int prod dnu sum_g prod (e^G - 1)
    double rho1 = 0.0;   ///< first insertion, centred
    double rho2 = 0.0;   ///< second insertion, centred
    double rho12 = 0.0;  ///< both insertions (second derivative of the modified activity)
    double error = 0.0;  ///< |rho(level) - rho(halved level)|
    double error1 = 0.0, error2 = 0.0, error12 = 0.0;
};

struct Polymer {
    std::uint32_t mask = 0;
    std::vector<std::size_t> cells;
    std::size_t size() const { return cells.size(); }
};

struct SeriesCaps {
    std::size_t max_n = 3;    ///< polymers per cluster
    std::size_t max_size = 3; ///< cells per polymer
};

struct SeriesEstimate {
    double value = 0.0;
    std::vector<double> per_order; ///< contribution of clusters with n polymers, n = 1..max_n
    double quad_error = 0.0;       ///< propagated activity quadrature error
    double tail = 0.0;             ///< magnitude of the last order kept
    std::size_t polymers = 0;

    double combined_error() const { return quad_error + tail; }
};

struct TwoPointEstimate : SeriesEstimate {
    double one_body = 0.0;    ///< single-cell variance term (x1 == x2 only)
    double case_d1 = 0.0;     ///< insertions on two different polymers, neither reaching the other point
    double case_d2 = 0.0;     ///< both insertions on one polymer
    double case_other = 0.0;  ///< remaining tuples
    std::size_t flagged = 0;  ///< number of tuples in neither case
};

class PolymerEngine {
public:
    PolymerEngine(PolymerParams P, Lattice L, EngineOptions opt = {})
        : P_(std::move(P)), L_(L), opt_(opt)
    {
        P_.validate();
        L_.validate();
        require(P_.T_sites.empty() || P_.T_sites.size() == L_.sites, "T_sites must have one entry per site");
        const std::size_t n = L_.size();
        coeffs_.resize(n * n);
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = 0; b < n; ++b)
                coeffs_[a * n + b] = pair_coeffs(P_, L_, L_.cell(a), L_.cell(b));
    }

    const PolymerParams& params() const { return P_; }
    const Lattice& lattice() const { return L_; }
    const EngineOptions& options() const { return opt_; }
    const PairCoeffs& coeffs(std::size_t a, std::size_t b) const { return coeffs_[a * L_.size() + b]; }
    bool linked(std::size_t a, std::size_t b) const { return a != b && coeffs(a, b).nonzero(); }

    SsdSpec ssd(std::size_t cell) const { return make_ssd(P_, L_.cell(cell).s, L_.kind(cell)); }

    /// Cached cell rule.
    std::shared_ptr<const CellRule> rule(std::size_t cell, QuadLevel lv) const
    {
        const auto key = std::make_tuple(L_.cell(cell).s, int(L_.kind(cell)), lv.m_q, lv.m_p);
        std::lock_guard<std::mutex> lk(mu_);
        auto it = rules_.find(key);
        if (it != rules_.end())
            return it->second;
        auto r = std::make_shared<const CellRule>(build_cell_rule(ssd(cell), lv.m_q, lv.m_p));
        rules_[key] = r;
        return r;
    }

    QuadLevel level_for(std::size_t n) const { return opt_.fixed_level ? *opt_.fixed_level : default_level(n); }

    /// Single-cell moments  <psi^c>  and  <psi^c psi^c'>  at the base level.
    double cell_mean(std::size_t cell, int comp) const
    {
        auto r = rule(cell, level_for(1));
        double s = 0.0;
        for (std::size_t k = 0; k < r->size(); ++k)
            s += r->w[k] * (comp == 0 ? r->q[k] : r->p[k]);
        return s;
    }

    double cell_second(std::size_t cell, int c1, int c2) const
    {
        auto r = rule(cell, level_for(1));
        double s = 0.0;
        for (std::size_t k = 0; k < r->size(); ++k)
            s += r->w[k] * (c1 == 0 ? r->q[k] : r->p[k]) * (c2 == 0 ? r->q[k] : r->p[k]);
        return s;
    }

    /// Connected subsets of cells (through nonzero links) with 2 <= |R| <= max_size.
    std::vector<Polymer> polymers(std::size_t max_size) const
    {
        require(max_size >= 2 && max_size <= 5, "polymer size cap must be in 2..5");
        const std::size_t n = L_.size();
        std::vector<Polymer> out;
        for (std::uint32_t m = 1; m < (std::uint32_t(1) << n); ++m) {
            int k = __builtin_popcount(m);
            if (k < 2 || std::size_t(k) > max_size)
                continue;
            if (!support_connected(m))
                continue;
            Polymer p;
            p.mask = m;
            for (std::size_t i = 0; i < n; ++i)
                if (m >> i & 1u)
                    p.cells.push_back(i);
            out.push_back(std::move(p));
        }
        return out;
    }

    bool support_connected(std::uint32_t m) const
    {
        const std::size_t n = L_.size();
        std::uint32_t start = m & (~m + 1);
        std::uint32_t seen = start, frontier = start;
        while (frontier) {
            std::uint32_t next = 0;
            for (std::size_t a = 0; a < n; ++a) {
                if (!(frontier >> a & 1u))
                    continue;
                for (std::size_t b = 0; b < n; ++b)
                    if ((m >> b & 1u) && !(seen >> b & 1u) && linked(a, b))
                        next |= 1u << b;
            }
            seen |= next;
            frontier = next;
        }
        return seen == m;
    }

    /// Activity of polymer R, optionally with one or two observable insertions.
    ActivityResult activity(const Polymer& R, const std::vector<Insertion>& ins = {}) const
    {
        QuadLevel lv = level_for(R.size());
        ActivityResult a = activity_at(R, ins, lv);
        if (opt_.error_estimate) {
            ActivityResult h = activity_at(R, ins, lv.halved());
            a.error = std::abs(a.rho - h.rho);
            a.error1 = std::abs(a.rho1 - h.rho1);
            a.error2 = std::abs(a.rho2 - h.rho2);
            a.error12 = std::abs(a.rho12 - h.rho12);
        }
        return a;
    }

    /// Activity evaluated by a tensor-product sum at a given level. Insertion
    /// factors are centred: (psi - l) for a single insertion; for two
    /// insertions on the same cell the modified second derivative
    /// psi^2 - 2 l psi + 2 l^2 - m2 is used.
    ActivityResult activity_at(const Polymer& R, const std::vector<Insertion>& ins, QuadLevel lv) const
    {
        const std::size_t n = R.size();
        require(n >= 2 && n <= 5, "activities are evaluated for 2 <= |R| <= 5");
        require(ins.size() <= 2, "at most two insertions");
        std::vector<std::shared_ptr<const CellRule>> rules(n);
        std::vector<std::size_t> K(n);
        double points = 1.0;
        for (std::size_t i = 0; i < n; ++i) {
            rules[i] = rule(R.cells[i], lv);
            K[i] = rules[i]->size();
            points *= double(K[i]);
        }
        require(points <= 4e8, "tensor-product sum too large; lower the quadrature level");

        // pair tables G_ij(k_i, k_j)
        std::vector<std::vector<double>> Gt(n * n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) {
                const PairCoeffs& c = coeffs(R.cells[i], R.cells[j]);
                auto& tab = Gt[i * n + j];
                tab.resize(K[i] * K[j]);
                const CellRule &ri = *rules[i], &rj = *rules[j];
                for (std::size_t a = 0; a < K[i]; ++a)
                    for (std::size_t b = 0; b < K[j]; ++b)
                        tab[a * K[j] + b] = c.G(ri.q[a], ri.p[a], rj.q[b], rj.p[b]);
            }

        // insertion factors per cell position
        std::vector<int> pos(ins.size(), -1);
        for (std::size_t m = 0; m < ins.size(); ++m)
            for (std::size_t i = 0; i < n; ++i)
                if (R.cells[i] == ins[m].cell)
                    pos[m] = int(i);
        auto value = [&](std::size_t i, std::size_t k, int comp) {
            return comp == 0 ? rules[i]->q[k] : rules[i]->p[k];
        };
        std::vector<double> ell(ins.size(), 0.0), m2(ins.size(), 0.0);
        for (std::size_t m = 0; m < ins.size(); ++m)
            if (pos[m] >= 0) {
                const CellRule& r = *rules[pos[m]];
                for (std::size_t k = 0; k < r.size(); ++k) {
                    double v = value(pos[m], k, ins[m].component);
                    ell[m] += r.w[k] * v;
                }
            }
        const bool same_cell = ins.size() == 2 && pos[0] >= 0 && pos[0] == pos[1];
        if (same_cell) {
            const CellRule& r = *rules[pos[0]];
            for (std::size_t k = 0; k < r.size(); ++k)
                m2[0] += r.w[k] * value(pos[0], k, ins[0].component) * value(pos[0], k, ins[1].component);
        }

        ActivityResult out;
        std::vector<std::size_t> idx(n, 0);
        double G[kMaxGraphVertices * kMaxGraphVertices];
        for (;;) {
            double w = 1.0;
            for (std::size_t i = 0; i < n; ++i)
                w *= rules[i]->w[idx[i]];
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = i + 1; j < n; ++j)
                    G[i * n + j] = G[j * n + i] = Gt[i * n + j][idx[i] * K[j] + idx[j]];
            double S = w * connected_sum(n, G);
            out.rho += S;
            double f1 = 0.0, f2 = 0.0;
            if (ins.size() >= 1 && pos[0] >= 0) {
                f1 = value(pos[0], idx[pos[0]], ins[0].component) - ell[0];
                out.rho1 += f1 * S;
            }
            if (ins.size() == 2 && pos[1] >= 0) {
                f2 = value(pos[1], idx[pos[1]], ins[1].component) - ell[1];
                out.rho2 += f2 * S;
            }
            if (ins.size() == 2 && pos[0] >= 0 && pos[1] >= 0) {
                if (same_cell) {
                    double a = value(pos[0], idx[pos[0]], ins[0].component);
                    double b = value(pos[1], idx[pos[1]], ins[1].component);
                    // (a b) - l0 b - l1 a + 2 l0 l1 - m2, the cross derivative of
                    // rho_alpha / P(alpha) with P the single-cell factor
                    out.rho12 += (a * b - ell[0] * b - ell[1] * a + 2.0 * ell[0] * ell[1] - m2[0]) * S;
                } else {
                    out.rho12 += f1 * f2 * S;
                }
            }
            std::size_t k = 0;
            while (k < n && ++idx[k] == K[k])
                idx[k++] = 0;
            if (k == n)
                break;
        }
        return out;
    }

    /// Truncated series for log Xi - (one-body part, which is zero for normalised weights).
    SeriesEstimate log_partition_series(const SeriesCaps& caps) const
    {
        auto polys = polymers(caps.max_size);
        std::vector<ActivityResult> act(polys.size());
        parallel_for(polys.size(), opt_.workers, [&](std::size_t i) { act[i] = activity(polys[i]); });
        SeriesEstimate est;
        est.polymers = polys.size();
        est.per_order.assign(caps.max_n, 0.0);
        for_each_cluster(polys, caps.max_n, [&](const std::vector<std::size_t>& tup, double phi) {
            const std::size_t n = tup.size();
            double prod = 1.0, err = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                double others = 1.0;
                for (std::size_t j = 0; j < n; ++j)
                    if (j != i)
                        others *= std::abs(act[tup[j]].rho);
                err += act[tup[i]].error * others;
                prod *= act[tup[i]].rho;
            }
            double coef = phi / std::tgamma(double(n) + 1.0);
            est.per_order[n - 1] += coef * prod;
            est.quad_error += std::abs(coef) * err;
        });
        for (double v : est.per_order)
            est.value += v;
        est.tail = caps.max_n > 0 ? std::abs(est.per_order.back()) : 0.0;
        return est;
    }

    /// Truncated connected two-point function  <psi_x1^c1 ; psi_x2^c2>.
    TwoPointEstimate two_point_series(Insertion x1, Insertion x2, const SeriesCaps& caps) const
    {
        require(x1.cell < L_.size() && x2.cell < L_.size(), "insertion cell outside lattice");
        require((x1.component == 0 || x1.component == 1) && (x2.component == 0 || x2.component == 1),
                "component must be 0 (q) or 1 (p)");
        auto polys = polymers(caps.max_size);
        std::vector<ActivityResult> act(polys.size());
        std::vector<Insertion> ins{x1, x2};
        parallel_for(polys.size(), opt_.workers, [&](std::size_t i) { act[i] = activity(polys[i], ins); });
        const bool same = x1.cell == x2.cell;
        const std::uint32_t b1 = 1u << x1.cell, b2 = 1u << x2.cell;

        TwoPointEstimate est;
        est.polymers = polys.size();
        est.per_order.assign(caps.max_n, 0.0);
        if (same) {
            double l1 = cell_mean(x1.cell, x1.component), l2 = cell_mean(x2.cell, x2.component);
            est.one_body = cell_second(x1.cell, x1.component, x2.component) - l1 * l2;
            est.per_order[0] += est.one_body;
        }
        for_each_cluster(polys, caps.max_n, [&](const std::vector<std::size_t>& tup, double phi) {
            const std::size_t n = tup.size();
            bool hit1 = false, hit2 = false;
            for (auto t : tup) {
                hit1 |= (polys[t].mask & b1) != 0;
                hit2 |= (polys[t].mask & b2) != 0;
            }
            if (!hit1 || !hit2)
                return;
            const double coef = phi / std::tgamma(double(n) + 1.0);
            double d1 = 0.0, d2 = 0.0, other = 0.0, err = 0.0;
            std::size_t flagged = 0;
            for (std::size_t i1 = 0; i1 < n; ++i1) {
                const auto& R1 = polys[tup[i1]];
                if (!(R1.mask & b1))
                    continue;
                for (std::size_t i2 = 0; i2 < n; ++i2) {
                    const auto& R2 = polys[tup[i2]];
                    if (!(R2.mask & b2))
                        continue;
                    double term, terr;
                    if (i1 == i2) {
                        term = act[tup[i1]].rho12;
                        terr = act[tup[i1]].error12;
                    } else {
                        term = act[tup[i1]].rho1 * act[tup[i2]].rho2;
                        terr = act[tup[i1]].error1 * std::abs(act[tup[i2]].rho2) +
                               std::abs(act[tup[i1]].rho1) * act[tup[i2]].error2;
                    }
                    double rest = 1.0, rest_abs = 1.0, rest_err = 0.0;
                    for (std::size_t j = 0; j < n; ++j)
                        if (j != i1 && j != i2) {
                            rest *= act[tup[j]].rho;
                            rest_abs *= std::abs(act[tup[j]].rho);
                        }
                    for (std::size_t j = 0; j < n; ++j)
                        if (j != i1 && j != i2) {
                            double o = 1.0;
                            for (std::size_t k = 0; k < n; ++k)
                                if (k != i1 && k != i2 && k != j)
                                    o *= std::abs(act[tup[k]].rho);
                            rest_err += act[tup[j]].error * o;
                        }
                    double v = term * rest;
                    err += terr * rest_abs + std::abs(term) * rest_err;
                    if (i1 == i2) {
                        d2 += v;
                    } else if (!same && !(R1.mask & b2) && !(R2.mask & b1) &&
                               single_hits(tup, b1, b2, i1, i2, polys)) {
                        d1 += v;
                    } else {
                        other += v;
                        ++flagged;
                    }
                }
            }
            est.case_d1 += coef * d1;
            est.case_d2 += coef * d2;
            est.case_other += coef * other;
            est.flagged += flagged;
            est.per_order[n - 1] += coef * (d1 + d2 + other);
            est.quad_error += std::abs(coef) * err;
        });
        for (double v : est.per_order)
            est.value += v;
        est.tail = std::abs(est.per_order.back() - (caps.max_n == 1 ? est.one_body : 0.0));
        return est;
    }

private:
    /// True when no polymer other than R_{i1} contains x1 and none other than R_{i2} contains x2.
    static bool single_hits(const std::vector<std::size_t>& tup, std::uint32_t b1, std::uint32_t b2,
                            std::size_t i1, std::size_t i2, const std::vector<Polymer>& polys)
    {
        for (std::size_t j = 0; j < tup.size(); ++j) {
            if (j != i1 && (polys[tup[j]].mask & b1))
                return false;
            if (j != i2 && (polys[tup[j]].mask & b2))
                return false;
        }
        return true;
    }

    /// Calls fn(tuple, ursell) for every ordered tuple of polymer indices with
    /// connected overlap graph, n = 1..max_n.
    template <class Fn>
    void for_each_cluster(const std::vector<Polymer>& polys, std::size_t max_n, Fn&& fn) const
    {
        require(max_n >= 1 && max_n <= 5, "cluster order cap must be in 1..5");
        const std::size_t P = polys.size();
        if (P == 0)
            return;
        double count = 0.0;
        for (std::size_t n = 1; n <= max_n; ++n)
            count += std::pow(double(P), double(n));
        require(count <= 2e8, "too many polymer tuples; lower max_n or the polymer size cap");
        std::vector<std::size_t> tup;
        for (std::size_t n = 1; n <= max_n; ++n) {
            tup.assign(n, 0);
            for (;;) {
                EdgeMask g = 0;
                for (std::size_t i = 0; i < n; ++i)
                    for (std::size_t j = i + 1; j < n; ++j)
                        if (polys[tup[i]].mask & polys[tup[j]].mask)
                            g |= EdgeMask(1) << edge_index(i, j, n);
                double phi = ursell(n, g);
                if (phi != 0.0)
                    fn(tup, phi);
                std::size_t k = 0;
                while (k < n && ++tup[k] == P)
                    tup[k++] = 0;
                if (k == n)
                    break;
            }
        }
    }

    PolymerParams P_;
    Lattice L_;
    EngineOptions opt_;
    std::vector<PairCoeffs> coeffs_;
    mutable std::mutex mu_;
    mutable std::map<std::tuple<std::size_t, int, std::size_t, std::size_t>, std::shared_ptr<const CellRule>> rules_;
};

} // namespace heatchain
