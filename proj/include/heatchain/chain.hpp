#pragma once

/** @file chain.hpp
 *  @brief Chain parameters, coupling matrix, Hamiltonian and forces.
 *
 *  H = sum_j [ p_j^2/2 + M_j q_j^2/2 + lambda q_j^4/4 ] + sum_{j<l} J_jl q_j q_l
 */

#include "errors.hpp"

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

namespace heatchain {

struct CouplingSpec {
    double J = 0.0;      ///< overall strength
    double p = 2.0;      ///< decay exponent, J_jl = J / |j-l|^p
    std::size_t range = 0; ///< couplings vanish beyond this distance; 0 means unlimited
};

/// Symmetric coupling matrix with per-row neighbour lists of nonzeros.
class CouplingMatrix {
public:
    struct Entry {
        std::size_t l;
        double J;
    };

    CouplingMatrix() = default;

    CouplingMatrix(std::size_t n, const CouplingSpec& spec) : n_(n), dense_(n * n, 0.0), rows_(n)
    {
        require(spec.J >= 0.0, "coupling J must be non-negative");
        require(spec.p > 1.0, "coupling exponent p must exceed 1");
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t l = 0; l < n; ++l) {
                if (j == l)
                    continue;
                std::size_t d = j > l ? j - l : l - j;
                if (spec.range != 0 && d > spec.range)
                    continue;
                double v = spec.J / std::pow(static_cast<double>(d), spec.p);
                if (v == 0.0)
                    continue;
                dense_[j * n + l] = v;
                rows_[j].push_back({l, v});
            }
    }

    std::size_t size() const { return n_; }
    double operator()(std::size_t j, std::size_t l) const { return dense_[j * n_ + l]; }
    const std::vector<Entry>& row(std::size_t j) const { return rows_[j]; }

    double row_sum(std::size_t j) const
    {
        double s = 0.0;
        for (const auto& e : rows_[j])
            s += e.J;
        return s;
    }

private:
    std::size_t n_ = 0;
    std::vector<double> dense_;
    std::vector<std::vector<Entry>> rows_;
};

struct ChainParams {
    std::size_t N = 0;
    std::vector<double> M;     ///< pinning, per site
    double lambda = 0.0;       ///< quartic anharmonicity
    std::vector<double> zeta;  ///< bath coupling, per site
    std::vector<double> T;     ///< bath temperatures, per site
    CouplingSpec coupling;
    double mass = 1.0;         ///< reserved; only unit mass is supported
    bool periodic = false;     ///< rejected by validate()

    void validate() const
    {
        require(N >= 1, "chain must have at least one site");
        require(M.size() == N && zeta.size() == N && T.size() == N,
                "M, zeta and T must each have N entries");
        require(!periodic, "periodic boundary conditions are not supported");
        require(mass == 1.0, "only unit mass is supported");
        require(std::isfinite(lambda) && lambda >= 0.0, "lambda must be finite and >= 0");
        for (std::size_t j = 0; j < N; ++j) {
            require(std::isfinite(M[j]) && M[j] > 0.0, "pinning M_j must be > 0");
            require(std::isfinite(zeta[j]) && zeta[j] >= 0.0, "bath coupling zeta_j must be >= 0");
            require(std::isfinite(T[j]) && T[j] > 0.0, "temperatures must be > 0");
        }
        require(coupling.J >= 0.0, "coupling J must be non-negative");
        require(coupling.p > 1.0, "coupling exponent p must exceed 1");
    }

    double max_zeta() const
    {
        double z = 0.0;
        for (double v : zeta)
            z = std::max(z, v);
        return z;
    }
};

/// Uniform chain helper: same M and zeta everywhere, linear temperature profile.
inline ChainParams make_chain(std::size_t N, double M, double lambda, double zeta, double T_left,
                              double T_right, CouplingSpec c)
{
    ChainParams cp;
    cp.N = N;
    cp.M.assign(N, M);
    cp.zeta.assign(N, zeta);
    cp.lambda = lambda;
    cp.coupling = c;
    cp.T.resize(N);
    for (std::size_t j = 0; j < N; ++j)
        cp.T[j] = N == 1 ? T_left : T_left + (T_right - T_left) * double(j) / double(N - 1);
    return cp;
}

/// Dynamical state of the chain.
struct ChainState {
    std::vector<double> q;
    std::vector<double> p;

    ChainState() = default;
    explicit ChainState(std::size_t n) : q(n, 0.0), p(n, 0.0) {}
    std::size_t size() const { return q.size(); }
};

class Chain {
public:
    explicit Chain(ChainParams params) : P_(std::move(params))
    {
        P_.validate();
        J_ = CouplingMatrix(P_.N, P_.coupling);
    }

    const ChainParams& params() const { return P_; }
    const CouplingMatrix& coupling() const { return J_; }
    std::size_t size() const { return P_.N; }

    double total_energy(const ChainState& s) const
    {
        check(s);
        double e = 0.0;
        for (std::size_t j = 0; j < P_.N; ++j) {
            double q = s.q[j];
            e += 0.5 * s.p[j] * s.p[j] + 0.5 * P_.M[j] * q * q + 0.25 * P_.lambda * q * q * q * q;
            for (const auto& c : J_.row(j))
                if (c.l > j)
                    e += c.J * q * s.q[c.l];
        }
        return e;
    }

    /// Local energy of site j. Summing over j reproduces total_energy exactly;
    /// the split is the one under which bond_current() is the energy current.
    double site_energy(const ChainState& s, std::size_t j) const
    {
        check(s);
        require(j < P_.N, "site index out of range");
        double q = s.q[j];
        double e = 0.5 * s.p[j] * s.p[j] + 0.25 * P_.lambda * q * q * q * q;
        double rs = 0.0;
        for (const auto& c : J_.row(j)) {
            double d = q - s.q[c.l];
            e -= 0.25 * c.J * d * d;
            rs += c.J;
        }
        e += 0.5 * (P_.M[j] + rs) * q * q;
        return e;
    }

    /// Conservative force -dH/dq_j.
    void forces(const std::vector<double>& q, std::vector<double>& f) const
    {
        f.resize(P_.N);
        for (std::size_t j = 0; j < P_.N; ++j) {
            double qj = q[j];
            double v = -P_.M[j] * qj - P_.lambda * qj * qj * qj;
            for (const auto& c : J_.row(j))
                v -= c.J * q[c.l];
            f[j] = v;
        }
    }

    /// Instantaneous energy current from site j to site l.
    double bond_current(const ChainState& s, std::size_t j, std::size_t l) const
    {
        return 0.5 * J_(j, l) * (s.q[l] - s.q[j]) * (s.p[j] + s.p[l]);
    }

private:
    void check(const ChainState& s) const
    {
        require(s.q.size() == P_.N && s.p.size() == P_.N, "state size does not match chain");
    }

    ChainParams P_;
    CouplingMatrix J_;
};

} // namespace heatchain
