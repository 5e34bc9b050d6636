#pragma once

/** @file selfconsistent.hpp
 *  @brief Damped fixed-point search for interior bath temperatures with zero
 *         net reservoir flux.
 */

#include "langevin.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

namespace heatchain {

struct SolverConfig {
    double eta = 0.5;           ///< damping of T <- (1-eta) T + eta <p^2>
    double tol = 1e-2;          ///< target for max_j |R_j| over interior sites
    double z_sigma = 0.0;       ///< statistical slack: |R_j| <= tol + z_sigma * se(R_j)
    std::size_t max_outer = 30;
    bool common_random_numbers = true; ///< reuse the noise stream in every outer iteration
    bool throw_on_failure = true;      ///< false: return the unconverged profile instead
    SimConfig sim;

    void validate(const ChainParams& cp) const
    {
        require(eta > 0.0 && eta <= 1.0, "eta must lie in (0, 1]");
        require(tol > 0.0, "tol must be > 0");
        require(z_sigma >= 0.0, "z_sigma must be >= 0");
        require(max_outer >= 1, "max_outer must be >= 1");
        sim.validate(cp);
    }
};

struct IterationRecord {
    std::size_t iteration = 0;
    double max_abs_R = 0.0;
    double median_abs_R = 0.0;
    std::vector<double> T;
};

struct Profile {
    std::vector<double> T;
    ObservableStats stats;   ///< statistics at the returned profile
    std::vector<IterationRecord> trace;
    std::size_t iterations = 0;
    bool converged = false;
};

inline std::vector<double> linear_profile(std::size_t N, double T_left, double T_right)
{
    std::vector<double> T(N);
    for (std::size_t j = 0; j < N; ++j)
        T[j] = N == 1 ? T_left : T_left + (T_right - T_left) * double(j) / double(N - 1);
    return T;
}

namespace detail {

inline std::vector<std::string> format_trace(const std::vector<IterationRecord>& tr)
{
    std::vector<std::string> out;
    for (const auto& r : tr) {
        std::ostringstream os;
        os << "iter " << r.iteration << " max|R| " << r.max_abs_R << " median|R| " << r.median_abs_R;
        out.push_back(os.str());
    }
    return out;
}

} // namespace detail

/// Finds interior temperatures T_2..T_{N-1} such that every interior bath
/// has zero mean flux. The endpoint temperatures are taken from `params.T`;
/// the interior entries are replaced by the linear interpolation as the
/// starting guess unless `keep_initial` is set.
inline Profile solve_profile(ChainParams params, const SolverConfig& cfg, unsigned workers = 1,
                             bool keep_initial = false)
{
    params.validate();
    cfg.validate(params);
    const std::size_t N = params.N;
    if (!keep_initial)
        params.T = linear_profile(N, params.T.front(), params.T.back());

    Profile prof;
    for (std::size_t it = 1; it <= cfg.max_outer; ++it) {
        SimConfig sc = cfg.sim;
        if (!cfg.common_random_numbers)
            sc.seed = cfg.sim.seed + 0x9e3779b97f4a7c15ull * it;
        Chain chain(params);
        ObservableStats st = run(chain, sc, workers);

        IterationRecord rec;
        rec.iteration = it;
        rec.T = params.T;
        std::vector<double> absR;
        bool ok = true;
        for (std::size_t j = 1; j + 1 < N; ++j) {
            double r = std::abs(st.sites[j].R.mean);
            absR.push_back(r);
            if (r > cfg.tol + cfg.z_sigma * st.sites[j].R.se)
                ok = false;
        }
        if (!absR.empty()) {
            rec.max_abs_R = *std::max_element(absR.begin(), absR.end());
            std::vector<double> s = absR;
            std::nth_element(s.begin(), s.begin() + s.size() / 2, s.end());
            rec.median_abs_R = s[s.size() / 2];
            if (s.size() % 2 == 0) {
                double lo = *std::max_element(s.begin(), s.begin() + s.size() / 2);
                rec.median_abs_R = 0.5 * (rec.median_abs_R + lo);
            }
        }
        prof.trace.push_back(rec);

        if (ok) {
            prof.T = params.T;
            prof.stats = std::move(st);
            prof.iterations = it;
            prof.converged = true;
            return prof;
        }
        std::vector<double> p2(N);
        for (std::size_t j = 0; j < N; ++j)
            p2[j] = st.sites[j].p2.mean;
        prof.stats = std::move(st);
        for (std::size_t j = 1; j + 1 < N; ++j) {
            double next = (1.0 - cfg.eta) * params.T[j] + cfg.eta * p2[j];
            if (!(next > 0.0) || !std::isfinite(next))
                throw NumericalError("self-consistent update produced a non-positive temperature",
                                     detail::format_trace(prof.trace));
            params.T[j] = next;
        }
    }
    if (cfg.throw_on_failure)
        throw NumericalError("self-consistent profile did not converge within max_outer iterations",
                             detail::format_trace(prof.trace));
    prof.T = prof.trace.back().T; // the profile the returned stats belong to
    prof.iterations = cfg.max_outer;
    return prof;
}

} // namespace heatchain
