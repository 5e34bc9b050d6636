#pragma once

/** @file oracle.hpp
 *  @brief Brute-force reference values on very small lattices: the full
 *         tensor-product integral of prod dnu e^{sum G}, with no cluster
 *         decomposition, plus an importance-sampling fallback.
 */

#include "polymer.hpp"
#include "rng.hpp"
#include "stats.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <vector>

namespace heatchain {

struct OracleResult {
    double value = 0.0;
    double error = 0.0; ///< |value(level) - value(halved level)| plus a rounding bound
};

namespace detail {

struct DirectSums {
    double Zm1 = 0.0;           ///< Z - 1
    double E1 = 0.0, E2 = 0.0;  ///< <psi1 e^{sum G}>, <psi2 e^{sum G}> (unnormalised)
    double E12 = 0.0;           ///< <psi1 psi2 e^{sum G}> (unnormalised)
    double A0 = 0.0, A1 = 0.0, A2 = 0.0, A12 = 0.0; ///< root sums of squared terms, for the rounding estimate
};

/// Neumaier compensated sum that also tracks the sum of squares.
struct CompensatedSum {
    double s = 0.0, c = 0.0, sq = 0.0;
    void add(double x)
    {
        double t = s + x;
        c += std::abs(s) >= std::abs(x) ? (s - t) + x : (x - t) + s;
        s = t;
        sq += x * x;
    }
    double value() const { return s + c; }
    double rms_scale() const { return std::sqrt(sq); }
};

/// Each term carries a few independent roundings (weight product, expm1, G);
/// after compensated summation they add in quadrature.
inline constexpr double kTermRounding = 16.0 * std::numeric_limits<double>::epsilon();

inline DirectSums direct_sums(const PolymerParams& P, const Lattice& L, QuadLevel lv, const Insertion* x1,
                              const Insertion* x2)
{
    P.validate();
    L.validate();
    const std::size_t n = L.size();
    std::size_t dims = 0;
    for (std::size_t i = 0; i < n; ++i)
        dims += L.kind(i) == SsdKind::Final ? 1 : 2;
    require(dims <= 6, "direct quadrature is limited to 6 integration dimensions");

    std::vector<CellRule> rules;
    std::vector<std::size_t> K(n);
    for (std::size_t i = 0; i < n; ++i) {
        rules.push_back(build_cell_rule(make_ssd(P, L.cell(i).s, L.kind(i)), lv.m_q, lv.m_p));
        K[i] = rules.back().size();
    }
    std::vector<PairCoeffs> pc(n * n);
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = a + 1; b < n; ++b)
            pc[a * n + b] = pair_coeffs(P, L, L.cell(a), L.cell(b));

    auto comp = [&](std::size_t i, std::size_t k, int c) { return c == 0 ? rules[i].q[k] : rules[i].p[k]; };
    // products of single-cell means for the factorised parts
    auto mean = [&](const Insertion& x) {
        double s = 0.0;
        for (std::size_t k = 0; k < K[x.cell]; ++k)
            s += rules[x.cell].w[k] * comp(x.cell, k, x.component);
        return s;
    };
    DirectSums out;
    double base1 = x1 ? mean(*x1) : 0.0, base2 = x2 ? mean(*x2) : 0.0, base12 = 0.0;
    if (x1 && x2) {
        if (x1->cell == x2->cell) {
            for (std::size_t k = 0; k < K[x1->cell]; ++k)
                base12 += rules[x1->cell].w[k] * comp(x1->cell, k, x1->component) * comp(x1->cell, k, x2->component);
        } else {
            base12 = base1 * base2;
        }
    }

    CompensatedSum z, e1, e2, e12;
    std::vector<std::size_t> idx(n, 0);
    for (;;) {
        double w = 1.0, g = 0.0;
        for (std::size_t a = 0; a < n; ++a) {
            w *= rules[a].w[idx[a]];
            for (std::size_t b = a + 1; b < n; ++b)
                g += pc[a * n + b].G(rules[a].q[idx[a]], rules[a].p[idx[a]], rules[b].q[idx[b]], rules[b].p[idx[b]]);
        }
        double f = w * std::expm1(g);
        z.add(f);
        double v1 = x1 ? comp(x1->cell, idx[x1->cell], x1->component) : 0.0;
        double v2 = x2 ? comp(x2->cell, idx[x2->cell], x2->component) : 0.0;
        e1.add(v1 * f);
        e2.add(v2 * f);
        e12.add(v1 * v2 * f);
        std::size_t k = 0;
        while (k < n && ++idx[k] == K[k])
            idx[k++] = 0;
        if (k == n)
            break;
    }
    out.Zm1 = z.value();
    out.E1 = e1.value() + base1;
    out.E2 = e2.value() + base2;
    out.E12 = e12.value() + base12;
    out.A0 = z.rms_scale();
    out.A1 = std::hypot(e1.rms_scale(), base1);
    out.A2 = std::hypot(e2.rms_scale(), base2);
    out.A12 = std::hypot(e12.rms_scale(), base12);
    return out;
}

inline double two_point_from(const DirectSums& s)
{
    double Z = 1.0 + s.Zm1;
    return s.E12 / Z - (s.E1 / Z) * (s.E2 / Z);
}

/// First-order propagation of per-term rounding into the connected two-point value.
inline double two_point_rounding(const DirectSums& s)
{
    const double Z = 1.0 + s.Zm1;
    const double m1 = std::abs(s.E1 / Z), m2 = std::abs(s.E2 / Z);
    const double t = std::abs(s.E12 / Z) + 2.0 * m1 * m2;
    return kTermRounding * (s.A12 + m2 * s.A1 + m1 * s.A2 + t * s.A0) / Z;
}

} // namespace detail

/// log of prod dnu e^{sum G} over the whole lattice.
inline OracleResult direct_log_partition(const PolymerParams& P, const Lattice& L, QuadLevel lv)
{
    auto a = detail::direct_sums(P, L, lv, nullptr, nullptr);
    auto b = detail::direct_sums(P, L, lv.halved(), nullptr, nullptr);
    const double round = detail::kTermRounding * a.A0 / (1.0 + a.Zm1);
    return {std::log1p(a.Zm1), std::abs(std::log1p(a.Zm1) - std::log1p(b.Zm1)) + round};
}

/// Partition function itself (normalised single-cell weights).
inline OracleResult direct_partition(const PolymerParams& P, const Lattice& L, QuadLevel lv)
{
    auto a = detail::direct_sums(P, L, lv, nullptr, nullptr);
    auto b = detail::direct_sums(P, L, lv.halved(), nullptr, nullptr);
    return {1.0 + a.Zm1, std::abs(a.Zm1 - b.Zm1) + detail::kTermRounding * a.A0};
}

/// Connected two-point function <psi_x1 ; psi_x2>.
inline OracleResult direct_two_point(const PolymerParams& P, const Lattice& L, Insertion x1, Insertion x2,
                                     QuadLevel lv)
{
    require(x1.cell < L.size() && x2.cell < L.size(), "insertion cell outside lattice");
    auto a = detail::direct_sums(P, L, lv, &x1, &x2);
    auto b = detail::direct_sums(P, L, lv.halved(), &x1, &x2);
    double va = detail::two_point_from(a), vb = detail::two_point_from(b);
    return {va, std::abs(va - vb) + detail::two_point_rounding(a)};
}

/// Sampler for one cell: q from its marginal by inverse CDF on a fine grid,
/// then p | q from the exact conditional Gaussian.
class CellSampler {
public:
    explicit CellSampler(const SsdSpec& s, std::size_t grid = 20001) : s_(s)
    {
        s.validate();
        const double R = detail::support_radius(s);
        const double emin = detail::marginal_minimum(s);
        x_.resize(grid);
        cdf_.resize(grid);
        double acc = 0.0, prev = 0.0;
        for (std::size_t i = 0; i < grid; ++i) {
            x_[i] = -R + 2.0 * R * double(i) / double(grid - 1);
            double w = std::exp(-(detail::marginal_exponent(s, x_[i]) - emin));
            if (i > 0)
                acc += 0.5 * (w + prev) * (x_[i] - x_[i - 1]);
            cdf_[i] = acc;
            prev = w;
        }
        for (double& c : cdf_)
            c /= acc;
    }

    void sample(Engine& eng, double& q, double& p) const
    {
        std::uniform_real_distribution<double> U(0.0, 1.0);
        double u = U(eng);
        auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
        std::size_t i = std::min<std::size_t>(std::max<std::ptrdiff_t>(it - cdf_.begin(), 1), cdf_.size() - 1);
        double t = (u - cdf_[i - 1]) / std::max(cdf_[i] - cdf_[i - 1], 1e-300);
        q = x_[i - 1] + t * (x_[i] - x_[i - 1]);
        p = 0.0;
        if (s_.has_p()) {
            std::normal_distribution<double> N(0.0, 1.0);
            p = -s_.a31 * q * q * q / (2.0 * s_.app) + N(eng) / std::sqrt(2.0 * s_.eg * s_.app);
        }
    }

private:
    SsdSpec s_;
    std::vector<double> x_, cdf_;
};

struct McResult {
    double value = 0.0;
    double se = 0.0;
};

/// Importance-sampling estimate of <psi_x1 ; psi_x2> with cells drawn from
/// their own weights; used where the tensor product is too large.
inline McResult direct_two_point_mc(const PolymerParams& P, const Lattice& L, Insertion x1, Insertion x2,
                                    std::size_t samples, std::uint64_t seed, std::size_t batches = 20)
{
    P.validate();
    L.validate();
    require(batches >= 2 && samples >= batches, "need at least one sample per batch");
    const std::size_t n = L.size();
    std::vector<CellSampler> cs;
    for (std::size_t i = 0; i < n; ++i)
        cs.emplace_back(make_ssd(P, L.cell(i).s, L.kind(i)));
    std::vector<PairCoeffs> pc(n * n);
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = a + 1; b < n; ++b)
            pc[a * n + b] = pair_coeffs(P, L, L.cell(a), L.cell(b));
    Engine eng = make_engine(seed, 0, 7);
    std::vector<double> q(n), p(n), est;
    const std::size_t per = samples / batches;
    for (std::size_t b = 0; b < batches; ++b) {
        double Z = 0, E1 = 0, E2 = 0, E12 = 0;
        for (std::size_t k = 0; k < per; ++k) {
            for (std::size_t i = 0; i < n; ++i)
                cs[i].sample(eng, q[i], p[i]);
            double g = 0.0;
            for (std::size_t a = 0; a < n; ++a)
                for (std::size_t c = a + 1; c < n; ++c)
                    g += pc[a * n + c].G(q[a], p[a], q[c], p[c]);
            double w = std::exp(g);
            double v1 = x1.component == 0 ? q[x1.cell] : p[x1.cell];
            double v2 = x2.component == 0 ? q[x2.cell] : p[x2.cell];
            Z += w;
            E1 += w * v1;
            E2 += w * v2;
            E12 += w * v1 * v2;
        }
        est.push_back(E12 / Z - (E1 / Z) * (E2 / Z));
    }
    auto e = batch_estimate(est);
    return {e.mean, e.se};
}

} // namespace heatchain
