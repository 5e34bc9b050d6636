#pragma once

/** @file graphs.hpp
 *  @brief Small labelled graphs: connected graphs, trees, the Ursell
 *         coefficient and the connected sum of Mayer factors.
 *
 *  A graph on n <= 8 vertices is a bitmask over the n(n-1)/2 vertex pairs,
 *  ordered (0,1), (0,2), ..., (0,n-1), (1,2), ...
 */

#include "errors.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <map>
#include <mutex>
#include <utility>
#include <vector>

namespace heatchain {

using EdgeMask = std::uint32_t;

constexpr std::size_t kMaxGraphVertices = 8;

inline std::size_t edge_count(std::size_t n) { return n * (n - 1) / 2; }

inline std::size_t edge_index(std::size_t i, std::size_t j, std::size_t n)
{
    if (i > j)
        std::swap(i, j);
    return i * n - i * (i + 1) / 2 + (j - i - 1);
}

inline std::vector<std::pair<std::size_t, std::size_t>> edge_list(std::size_t n)
{
    std::vector<std::pair<std::size_t, std::size_t>> e;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            e.emplace_back(i, j);
    return e;
}

/// True if the spanning subgraph `g` on n vertices is connected.
inline bool is_connected(std::size_t n, EdgeMask g)
{
    if (n <= 1)
        return true;
    auto edges = edge_list(n);
    std::uint32_t seen = 1u, frontier = 1u;
    while (frontier) {
        std::uint32_t next = 0;
        for (std::size_t e = 0; e < edges.size(); ++e) {
            if (!(g >> e & 1u))
                continue;
            auto [a, b] = edges[e];
            if ((frontier >> a & 1u) && !(seen >> b & 1u))
                next |= 1u << b;
            if ((frontier >> b & 1u) && !(seen >> a & 1u))
                next |= 1u << a;
        }
        seen |= next;
        frontier = next;
    }
    return seen == (1u << n) - 1u;
}

/// All connected spanning graphs on n labelled vertices (1 <= n <= 6).
inline std::vector<EdgeMask> connected_graphs(std::size_t n)
{
    require(n >= 1 && n <= 6, "connected graph enumeration supports 1 <= n <= 6");
    std::vector<EdgeMask> out;
    const std::size_t m = edge_count(n);
    for (EdgeMask g = 0; g < (EdgeMask(1) << m); ++g)
        if (is_connected(n, g))
            out.push_back(g);
    return out;
}

/// Labelled trees on n vertices from all Pruefer sequences (1 <= n <= 8).
inline std::vector<EdgeMask> enumerate_trees(std::size_t n)
{
    require(n >= 1 && n <= kMaxGraphVertices, "tree enumeration supports 1 <= n <= 8");
    if (n == 1)
        return {0};
    if (n == 2)
        return {1};
    std::vector<EdgeMask> out;
    std::vector<std::size_t> seq(n - 2, 0);
    for (;;) {
        std::vector<std::size_t> deg(n, 1);
        for (auto v : seq)
            ++deg[v];
        EdgeMask g = 0;
        for (auto v : seq) {
            std::size_t leaf = 0;
            while (deg[leaf] != 1)
                ++leaf;
            g |= EdgeMask(1) << edge_index(leaf, v, n);
            --deg[leaf];
            --deg[v];
        }
        std::size_t u = n, w = n;
        for (std::size_t i = 0; i < n; ++i)
            if (deg[i] == 1)
                (u == n ? u : w) = i;
        g |= EdgeMask(1) << edge_index(u, w, n);
        out.push_back(g);

        std::size_t k = 0;
        while (k < seq.size() && ++seq[k] == n)
            seq[k++] = 0;
        if (k == seq.size())
            break;
    }
    return out;
}

inline std::vector<std::size_t> degrees(std::size_t n, EdgeMask g)
{
    std::vector<std::size_t> d(n, 0);
    auto edges = edge_list(n);
    for (std::size_t e = 0; e < edges.size(); ++e)
        if (g >> e & 1u) {
            ++d[edges[e].first];
            ++d[edges[e].second];
        }
    return d;
}

/// Number of labelled trees on n vertices with the given degrees:
/// (n-2)! / prod (d_i - 1)!.
inline double trees_with_degrees(const std::vector<std::size_t>& d)
{
    const std::size_t n = d.size();
    require(n >= 2, "need at least two vertices");
    std::size_t sum = 0;
    for (auto v : d) {
        require(v >= 1, "tree degrees must be >= 1");
        sum += v;
    }
    if (sum != 2 * (n - 1))
        return 0.0;
    double r = std::tgamma(double(n - 1));
    for (auto v : d)
        r /= std::tgamma(double(v));
    return std::round(r);
}

/// Weighted spanning-tree sum  sum_trees prod_{e in tree} w_e  by the
/// matrix-tree theorem; w is an n x n symmetric matrix.
inline double spanning_tree_sum(const Eigen::MatrixXd& w)
{
    const Eigen::Index n = w.rows();
    if (n <= 1)
        return 1.0;
    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            if (i != j) {
                L(i, j) = -w(i, j);
                L(i, i) += w(i, j);
            }
    return L.bottomRightCorner(n - 1, n - 1).determinant();
}

inline double spanning_tree_count(std::size_t n, EdgeMask g)
{
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
    auto edges = edge_list(n);
    for (std::size_t e = 0; e < edges.size(); ++e)
        if (g >> e & 1u)
            w(edges[e].first, edges[e].second) = w(edges[e].second, edges[e].first) = 1.0;
    return std::round(spanning_tree_sum(w));
}

/// Ursell coefficient of a graph g on n vertices: 1 for n = 1, otherwise
/// sum over connected spanning subgraphs f of g of (-1)^{|f|}; 0 when g is
/// disconnected. Results are cached.
inline double ursell(std::size_t n, EdgeMask g)
{
    require(n >= 1 && n <= 6, "Ursell coefficient supports 1 <= n <= 6");
    if (n == 1)
        return 1.0;
    if (!is_connected(n, g))
        return 0.0;
    static std::mutex mu;
    static std::map<std::pair<std::size_t, EdgeMask>, double> cache;
    {
        std::lock_guard<std::mutex> lk(mu);
        auto it = cache.find({n, g});
        if (it != cache.end())
            return it->second;
    }
    double s = 0.0;
    for (EdgeMask f = g;; f = (f - 1) & g) {
        if (is_connected(n, f))
            s += (__builtin_popcount(f) % 2 == 0) ? 1.0 : -1.0;
        if (f == 0)
            break;
    }
    std::lock_guard<std::mutex> lk(mu);
    cache[{n, g}] = s;
    return s;
}

/// sum over connected graphs g on n vertices of prod_{ij in g} (e^{G_ij} - 1),
/// evaluated by the recursion over the components left after deleting the
/// last vertex. Every Mayer factor is formed with expm1, so no O(1) terms
/// cancel; G is a dense n x n row-major array.
inline double connected_sum(std::size_t n, const double* G)
{
    require(n >= 1 && n <= kMaxGraphVertices, "connected_sum supports 1 <= n <= 8");
    if (n == 1)
        return 1.0;
    if (n == 2)
        return std::expm1(G[1]);
    if (n == 3) {
        double f01 = std::expm1(G[1]), f02 = std::expm1(G[2]), f12 = std::expm1(G[5]);
        return f01 * f02 + f01 * f12 + f02 * f12 + f01 * f02 * f12;
    }
    const std::size_t full = (std::size_t(1) << n) - 1;
    double C[1u << kMaxGraphVertices];
    double H[1u << kMaxGraphVertices];
    for (std::size_t S = 1; S <= full; ++S) {
        if ((S & (S - 1)) == 0) {
            C[S] = 1.0;
            continue;
        }
        const std::size_t v = 63 - __builtin_clzll(S); // highest vertex of S
        const std::size_t rest = S & ~(std::size_t(1) << v);
        // H[B]: sum over partitions of B into connected blocks T, each joined
        // to v by at least one edge, of prod C[T] (e^{sum_{u in T} G_vu} - 1).
        H[0] = 1.0;
        for (std::size_t B = 1; B <= rest; ++B) {
            if ((B & rest) != B)
                continue;
            const std::size_t low = B & (~B + 1);
            double h = 0.0;
            for (std::size_t T = B; T; T = (T - 1) & B) {
                if (!(T & low))
                    continue;
                double g = 0.0;
                for (std::size_t u = 0; u < n; ++u)
                    if (T >> u & 1u)
                        g += G[v * n + u];
                h += C[T] * std::expm1(g) * H[B & ~T];
            }
            H[B] = h;
        }
        C[S] = H[rest];
    }
    return C[full];
}

/// Tree-graph majorant  e^{sum V_x} sum_trees prod |V_xy|  for the connected
/// sum of prod (e^{-V_xy} - 1); valid when the stability condition holds.
inline double tree_majorant(const std::vector<double>& Vx, const Eigen::MatrixXd& Vxy)
{
    double s = 0.0;
    for (double v : Vx)
        s += v;
    return std::exp(s) * spanning_tree_sum(Vxy.cwiseAbs());
}

/// Stability: sum_{x in S} V_x + sum_{pairs in S} V_xy >= 0 for every S.
inline bool stable(const std::vector<double>& Vx, const Eigen::MatrixXd& Vxy)
{
    const std::size_t n = Vx.size();
    for (std::size_t S = 1; S < (std::size_t(1) << n); ++S) {
        double t = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (!(S >> i & 1u))
                continue;
            t += Vx[i];
            for (std::size_t j = i + 1; j < n; ++j)
                if (S >> j & 1u)
                    t += Vxy(i, j);
        }
        if (t < 0.0)
            return false;
    }
    return true;
}

} // namespace heatchain
