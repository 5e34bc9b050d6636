#include <heatchain/selfconsistent.hpp>

#include <gtest/gtest.h>

using namespace heatchain;

namespace {

SolverConfig base_solver(std::uint64_t steps)
{
    SolverConfig sc;
    sc.eta = 0.5;
    sc.tol = 1e-2;
    sc.max_outer = 30;
    sc.sim.dt = 0.01;
    sc.sim.n_steps = steps;
    sc.sim.burn_in = steps / 20;
    sc.sim.seed = 17;
    sc.sim.sample_every = 2;
    return sc;
}

} // namespace

TEST(SelfConsistent, LinearProfile)
{
    auto T = linear_profile(5, 2.0, 1.0);
    EXPECT_DOUBLE_EQ(T[0], 2.0);
    EXPECT_DOUBLE_EQ(T[2], 1.5);
    EXPECT_DOUBLE_EQ(T[4], 1.0);
}

TEST(SelfConsistent, EquilibriumIsIdempotent)
{
    ChainParams cp = make_chain(5, 2.0, 1.0, 1.0, 1.0, 1.0, {0.2, 2.0, 1});
    SolverConfig sc = base_solver(400000);
    sc.z_sigma = 3.0;
    Profile p = solve_profile(cp, sc);
    EXPECT_TRUE(p.converged);
    EXPECT_EQ(p.iterations, 1u);
    for (double t : p.T)
        EXPECT_DOUBLE_EQ(t, 1.0);
}

TEST(SelfConsistent, BoundaryTemperaturesUntouched)
{
    ChainParams cp = make_chain(6, 2.0, 1.0, 1.0, 1.4, 0.6, {0.3, 2.0, 1});
    SolverConfig sc = base_solver(200000);
    sc.max_outer = 4;
    sc.throw_on_failure = false;
    Profile p = solve_profile(cp, sc);
    EXPECT_DOUBLE_EQ(p.T.front(), 1.4);
    EXPECT_DOUBLE_EQ(p.T.back(), 0.6);
}

TEST(SelfConsistent, ResidualsDecreaseEarly)
{
    ChainParams cp = make_chain(6, 2.0, 1.0, 1.0, 2.0, 0.5, {0.5, 2.0, 1});
    SolverConfig sc = base_solver(400000);
    sc.tol = 1e-9; // run a fixed number of iterations
    sc.max_outer = 6;
    sc.throw_on_failure = false;
    Profile p = solve_profile(cp, sc);
    ASSERT_EQ(p.trace.size(), 6u);
    int decreases = 0;
    for (std::size_t k = 0; k + 1 < 6; ++k)
        decreases += p.trace[k + 1].median_abs_R < p.trace[k].median_abs_R;
    EXPECT_GE(decreases, 4);
    EXPECT_LT(p.trace.back().median_abs_R, p.trace.front().median_abs_R);
}

TEST(SelfConsistent, FailureCarriesTrace)
{
    ChainParams cp = make_chain(5, 2.0, 1.0, 1.0, 2.0, 0.5, {0.5, 2.0, 1});
    SolverConfig sc = base_solver(20000);
    sc.tol = 1e-9;
    sc.max_outer = 2;
    try {
        solve_profile(cp, sc);
        FAIL() << "expected non-convergence";
    } catch (const NumericalError& e) {
        EXPECT_EQ(e.trace.size(), 2u);
    }
}

TEST(SelfConsistent, HarmonicChainHasUniformCurrent)
{
    ChainParams cp = make_chain(8, 2.0, 0.0, 1.0, 1.2, 0.8, {0.5, 2.0, 1});
    SolverConfig sc = base_solver(2000000);
    sc.eta = 1.0;
    sc.tol = 2e-3;
    sc.z_sigma = 2.0;
    Profile p = solve_profile(cp, sc);
    ASSERT_TRUE(p.converged);
    // run the converged profile and compare bond currents
    ChainParams q = cp;
    q.T = p.T;
    SimConfig sim = sc.sim;
    sim.seed = 99;
    auto st = run(Chain(q), sim);
    const auto& b = st.bonds;
    double mean = 0.0, w = 0.0;
    for (const auto& x : b) {
        mean += x.flux.mean / (x.flux.se * x.flux.se);
        w += 1.0 / (x.flux.se * x.flux.se);
    }
    mean /= w;
    for (const auto& x : b)
        EXPECT_LT(std::abs(x.flux.mean - mean), 3.5 * x.flux.se);
    EXPECT_GT(mean, 0.0);
}

TEST(SelfConsistent, RejectsBadConfig)
{
    ChainParams cp = make_chain(4, 2.0, 1.0, 1.0, 1.2, 0.8, {0.5, 2.0, 1});
    SolverConfig sc = base_solver(20000);
    sc.eta = 0.0;
    EXPECT_THROW(solve_profile(cp, sc), ValidationError);
    sc.eta = 0.5;
    sc.tol = 0.0;
    EXPECT_THROW(solve_profile(cp, sc), ValidationError);
}
