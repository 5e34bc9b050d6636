#pragma once

/** @file langevin.hpp
 *  @brief Stochastic integration of the chain with per-site Langevin baths.
 *
 *  dq = p dt,  dp = -dH/dq dt - zeta p dt + sqrt(2 zeta T) dB.
 */

#include "chain.hpp"
#include "parallel.hpp"
#include "rng.hpp"
#include "stats.hpp"

#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

namespace heatchain {

enum class Scheme {
    Euler,     ///< Euler-Maruyama reference scheme
    Splitting  ///< kick/drift halves around an exact Ornstein-Uhlenbeck step
};

inline Scheme parse_scheme(const std::string& s)
{
    if (s == "euler")
        return Scheme::Euler;
    if (s == "splitting")
        return Scheme::Splitting;
    throw ValidationError("unknown integration scheme '" + s + "'");
}

inline std::string to_string(Scheme s) { return s == Scheme::Euler ? "euler" : "splitting"; }

struct SimConfig {
    double dt = 0.0;
    std::uint64_t burn_in = 0;   ///< steps discarded before sampling
    std::uint64_t n_steps = 0;   ///< production steps per replica
    std::uint64_t seed = 0;
    std::size_t batch_count = 20;
    std::size_t replicas = 1;
    std::size_t sample_every = 1;
    Scheme scheme = Scheme::Splitting;

    void validate(const ChainParams& cp) const
    {
        require(std::isfinite(dt) && dt > 0.0, "dt must be > 0");
        require(dt * cp.max_zeta() < 0.5, "stability guard violated: dt * max(zeta) must be < 0.5");
        require(batch_count >= 2, "batch_count must be >= 2");
        require(replicas >= 1, "replicas must be >= 1");
        require(sample_every >= 1, "sample_every must be >= 1");
        require(n_steps / sample_every >= batch_count,
                "n_steps / sample_every must provide at least one sample per batch");
    }
};

struct SiteStats {
    Estimate q2;  ///< <q_j^2>
    Estimate p2;  ///< <p_j^2>
    Estimate R;   ///< reservoir flux zeta_j (T_j - <p_j^2>)
};

struct BondStats {
    Estimate flux; ///< nearest-neighbour current j -> j+1
    Estimate cut;  ///< total current crossing the cut between j and j+1
};

struct ObservableStats {
    std::vector<SiteStats> sites;
    std::vector<BondStats> bonds;   ///< N-1 entries
    std::size_t samples = 0;        ///< samples per replica
    std::size_t batches = 0;        ///< total batches over all replicas

    /// Mean and SE of the bond current averaged over all bonds (batchwise).
    Estimate mean_flux;
};

/// Energy injected by the bath at a site per unit time.
inline double reservoir_flux(double zeta, double T, double p2) { return zeta * (T - p2); }

/// Instantaneous current j -> l.
inline double bond_flux(const Chain& chain, const ChainState& s, std::size_t j, std::size_t l)
{
    return chain.bond_current(s, j, l);
}

/// One-chain integrator; owns force and noise buffers.
class Integrator {
public:
    Integrator(const Chain& chain, double dt, Scheme scheme) : chain_(&chain), dt_(dt), scheme_(scheme)
    {
        const auto& P = chain.params();
        require(std::isfinite(dt) && dt > 0.0, "dt must be > 0");
        require(dt * P.max_zeta() < 0.5, "stability guard violated: dt * max(zeta) must be < 0.5");
        const std::size_t n = P.N;
        decay_.resize(n);
        kick_.resize(n);
        for (std::size_t j = 0; j < n; ++j) {
            double z = P.zeta[j];
            decay_[j] = std::exp(-z * dt);
            kick_[j] = scheme == Scheme::Splitting ? std::sqrt(P.T[j] * (1.0 - decay_[j] * decay_[j]))
                                                   : std::sqrt(2.0 * z * P.T[j] * dt);
        }
    }

    /// Must be called once before step() for a new state.
    void prepare(const ChainState& s) { chain_->forces(s.q, f_); }

    /// Advances the state by one step using standard normals from `g`.
    void step(ChainState& s, Gaussian& g)
    {
        const auto& P = chain_->params();
        const std::size_t n = P.N;
        const double dt = dt_;
        if (scheme_ == Scheme::Euler) {
            chain_->forces(s.q, f_);
            for (std::size_t j = 0; j < n; ++j) {
                double p = s.p[j];
                s.q[j] += p * dt;
                s.p[j] = p + (f_[j] - P.zeta[j] * p) * dt + kick_[j] * g();
            }
        } else {
            const double h = 0.5 * dt;
            for (std::size_t j = 0; j < n; ++j) {
                s.p[j] += h * f_[j];
                s.q[j] += h * s.p[j];
                s.p[j] = decay_[j] * s.p[j] + kick_[j] * g();
                s.q[j] += h * s.p[j];
            }
            chain_->forces(s.q, f_);
            for (std::size_t j = 0; j < n; ++j)
                s.p[j] += h * f_[j];
        }
    }

    /// Throws NumericalError naming the first non-finite site.
    void check_finite(const ChainState& s, std::uint64_t step_index) const
    {
        for (std::size_t j = 0; j < s.size(); ++j)
            if (!std::isfinite(s.q[j]) || !std::isfinite(s.p[j])) {
                std::ostringstream os;
                os << "non-finite state at site " << j << " after step " << step_index;
                throw NumericalError(os.str());
            }
    }

private:
    const Chain* chain_;
    double dt_;
    Scheme scheme_;
    std::vector<double> decay_, kick_, f_;
};

/// Single deterministic step without noise bookkeeping (useful for tests).
inline void step(const Chain& chain, ChainState& s, double dt, Scheme scheme, Engine& eng)
{
    Integrator it(chain, dt, scheme);
    it.prepare(s);
    Gaussian g(eng);
    it.step(s, g);
}

namespace detail {

struct ReplicaResult {
    std::vector<std::vector<double>> batch_means; ///< [batch][observable]
    std::size_t samples = 0;
};

inline void fill_observables(const Chain& chain, const ChainState& s, std::vector<double>& x)
{
    const std::size_t n = chain.size();
    const std::size_t nb = n > 0 ? n - 1 : 0;
    for (std::size_t j = 0; j < n; ++j) {
        x[j] = s.q[j] * s.q[j];
        x[n + j] = s.p[j] * s.p[j];
    }
    double* bond = &x[2 * n];
    double* cut = &x[2 * n + nb];
    for (std::size_t j = 0; j < nb; ++j) {
        bond[j] = chain.bond_current(s, j, j + 1);
        cut[j] = 0.0;
    }
    const auto& J = chain.coupling();
    for (std::size_t l = 0; l < n; ++l)
        for (const auto& e : J.row(l)) {
            if (e.l <= l)
                continue;
            double c = 0.5 * e.J * (s.q[e.l] - s.q[l]) * (s.p[l] + s.p[e.l]);
            for (std::size_t k = l; k < e.l; ++k)
                cut[k] += c;
        }
}

inline ReplicaResult run_replica(const Chain& chain, const SimConfig& cfg, std::size_t replica,
                                 const ChainState* init)
{
    const std::size_t n = chain.size();
    const std::size_t nb = n > 0 ? n - 1 : 0;
    const std::size_t k = 2 * n + 2 * nb;
    Engine eng = make_engine(cfg.seed, replica, 1);
    Gaussian g(eng);

    ChainState s(n);
    if (init) {
        require(init->size() == n, "initial state size does not match chain");
        s = *init;
    } else {
        for (std::size_t j = 0; j < n; ++j)
            s.p[j] = std::sqrt(chain.params().T[j]) * g();
    }

    Integrator it(chain, cfg.dt, cfg.scheme);
    it.prepare(s);
    for (std::uint64_t t = 0; t < cfg.burn_in; ++t) {
        it.step(s, g);
        if ((t & 1023u) == 0)
            it.check_finite(s, t);
    }
    it.check_finite(s, cfg.burn_in);

    const std::size_t total_samples = cfg.n_steps / cfg.sample_every;
    const std::size_t per = total_samples / cfg.batch_count;
    BatchAccumulator acc(k, cfg.batch_count, per);
    std::vector<double> x(k);
    for (std::uint64_t t = 1; t <= cfg.n_steps; ++t) {
        it.step(s, g);
        if (t % cfg.sample_every == 0) {
            fill_observables(chain, s, x);
            acc.add(x.data());
        }
        if ((t & 1023u) == 0)
            it.check_finite(s, cfg.burn_in + t);
    }
    it.check_finite(s, cfg.burn_in + cfg.n_steps);

    ReplicaResult r;
    r.samples = acc.samples();
    r.batch_means.assign(cfg.batch_count, std::vector<double>(k));
    for (std::size_t b = 0; b < cfg.batch_count; ++b)
        for (std::size_t i = 0; i < k; ++i)
            r.batch_means[b][i] = acc.batch_mean(b, i);
    return r;
}

} // namespace detail

/// Runs all replicas (possibly in parallel) and reduces with batch means.
/// Results are identical for any worker count.
inline ObservableStats run(const Chain& chain, const SimConfig& cfg, unsigned workers = 1,
                           const ChainState* init = nullptr)
{
    const auto& P = chain.params();
    cfg.validate(P);
    const std::size_t n = P.N;
    const std::size_t nb = n > 0 ? n - 1 : 0;

    std::vector<detail::ReplicaResult> res(cfg.replicas);
    parallel_for(cfg.replicas, workers,
                 [&](std::size_t r) { res[r] = detail::run_replica(chain, cfg, r, init); });

    const std::size_t total = cfg.replicas * cfg.batch_count;
    auto collect = [&](std::size_t i) {
        std::vector<double> v;
        v.reserve(total);
        for (const auto& r : res)
            for (const auto& b : r.batch_means)
                v.push_back(b[i]);
        return batch_estimate(v);
    };

    ObservableStats out;
    out.samples = res.front().samples;
    out.batches = total;
    out.sites.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        out.sites[j].q2 = collect(j);
        out.sites[j].p2 = collect(n + j);
        out.sites[j].R.mean = reservoir_flux(P.zeta[j], P.T[j], out.sites[j].p2.mean);
        out.sites[j].R.se = P.zeta[j] * out.sites[j].p2.se;
    }
    out.bonds.resize(nb);
    for (std::size_t j = 0; j < nb; ++j) {
        out.bonds[j].flux = collect(2 * n + j);
        out.bonds[j].cut = collect(2 * n + nb + j);
    }
    if (nb > 0) {
        std::vector<double> v;
        for (const auto& r : res)
            for (const auto& b : r.batch_means) {
                double s = 0.0;
                for (std::size_t j = 0; j < nb; ++j)
                    s += b[2 * n + j];
                v.push_back(s / double(nb));
            }
        out.mean_flux = batch_estimate(v);
    }
    return out;
}

} // namespace heatchain
