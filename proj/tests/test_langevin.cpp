#include <heatchain/langevin.hpp>

#include <gtest/gtest.h>

using namespace heatchain;

TEST(Langevin, DeterministicEulerStep)
{
    ChainParams cp = make_chain(1, 1.0, 0.0, 0.0, 1.0, 1.0, {});
    Chain ch(cp);
    ChainState s(1);
    s.q = {1.0};
    Engine eng = make_engine(1, 0);
    step(ch, s, 0.1, Scheme::Euler, eng);
    EXPECT_DOUBLE_EQ(s.q[0], 1.0);
    EXPECT_DOUBLE_EQ(s.p[0], -0.1);
}

// Explicit Euler on a unit oscillator multiplies the energy by exactly 1 + dt^2 per step.
TEST(Langevin, EulerEnergyGrowthIsExact)
{
    ChainParams cp = make_chain(1, 1.0, 0.0, 0.0, 1.0, 1.0, {});
    Chain ch(cp);
    ChainState s(1);
    s.q = {1.0};
    const double dt = 1e-3, E0 = ch.total_energy(s);
    Engine eng = make_engine(1, 0);
    Gaussian g(eng);
    Integrator it(ch, dt, Scheme::Euler);
    it.prepare(s);
    const std::size_t steps = std::size_t(10 * 2 * M_PI / dt);
    for (std::size_t t = 0; t < steps; ++t)
        it.step(s, g);
    const double expect = E0 * std::pow(1.0 + dt * dt, double(steps));
    EXPECT_NEAR(ch.total_energy(s), expect, 1e-9 * expect);
    EXPECT_LT(std::abs(ch.total_energy(s) - E0) / E0, 0.1);
}

TEST(Langevin, ReservoirFlux)
{
    EXPECT_EQ(reservoir_flux(1.0, 2.0, 2.0), 0.0);
    EXPECT_DOUBLE_EQ(reservoir_flux(2.0, 1.0, 0.5), 1.0);
}

TEST(Langevin, BondFluxMatchesChain)
{
    Chain ch(make_chain(2, 1.0, 0.0, 1.0, 1.0, 1.0, {1.0, 2.0, 0}));
    ChainState s(2);
    s.q = {1.0, 0.0};
    s.p = {0.0, 2.0};
    EXPECT_DOUBLE_EQ(bond_flux(ch, s, 0, 1), -1.0);
    s.p = {0.0, 0.0};
    EXPECT_EQ(bond_flux(ch, s, 0, 1), 0.0);
}

TEST(Langevin, ConfigValidation)
{
    ChainParams cp = make_chain(2, 1.0, 0.0, 10.0, 1.0, 1.0, {});
    SimConfig sc;
    sc.dt = 0.1;
    sc.n_steps = 1000;
    EXPECT_THROW(sc.validate(cp), ValidationError); // dt * zeta = 1
    sc.dt = 0.01;
    sc.batch_count = 1;
    EXPECT_THROW(sc.validate(cp), ValidationError);
    sc.batch_count = 20;
    EXPECT_NO_THROW(sc.validate(cp));
    EXPECT_THROW(parse_scheme("rk4"), ValidationError);
}

TEST(Langevin, DivergenceIsReported)
{
    ChainParams cp = make_chain(2, 1.0, 0.0, 1.0, 1.0, 1.0, {});
    cp.M = {1e12, 1e12}; // explicit step is unstable
    Chain ch(cp);
    SimConfig sc;
    sc.dt = 0.01;
    sc.n_steps = 20000;
    sc.scheme = Scheme::Euler;
    try {
        run(ch, sc);
        FAIL() << "expected divergence";
    } catch (const NumericalError& e) {
        EXPECT_NE(std::string(e.what()).find("site"), std::string::npos);
        EXPECT_NE(std::string(e.what()).find("step"), std::string::npos);
    }
}

TEST(Langevin, SeedDeterminismAcrossWorkers)
{
    Chain ch(make_chain(4, 1.5, 1.0, 1.0, 1.5, 0.5, {0.3, 2.0, 1}));
    SimConfig sc;
    sc.dt = 0.01;
    sc.n_steps = 20000;
    sc.burn_in = 1000;
    sc.replicas = 3;
    sc.seed = 42;
    auto a = run(ch, sc, 1), b = run(ch, sc, 1), c = run(ch, sc, 3);
    for (std::size_t j = 0; j < 4; ++j) {
        EXPECT_EQ(a.sites[j].p2.mean, b.sites[j].p2.mean);
        EXPECT_EQ(a.sites[j].p2.mean, c.sites[j].p2.mean);
        EXPECT_EQ(a.sites[j].q2.se, c.sites[j].q2.se);
    }
    sc.seed = 43;
    auto d = run(ch, sc, 1);
    EXPECT_NE(a.sites[0].p2.mean, d.sites[0].p2.mean);
    EXPECT_EQ(a.batches, 60u);
    EXPECT_EQ(a.samples, 20000u);
}

TEST(Langevin, HarmonicEquilibriumCovariance)
{
    for (Scheme sch : {Scheme::Euler, Scheme::Splitting}) {
        Chain ch(make_chain(1, 1.0, 0.0, 1.0, 2.0, 2.0, {}));
        SimConfig sc;
        sc.dt = 1e-3;
        sc.n_steps = 2000000;
        sc.burn_in = 10000;
        sc.sample_every = 10;
        sc.seed = 5;
        sc.scheme = sch;
        auto st = run(ch, sc);
        EXPECT_NEAR(st.sites[0].p2.mean, 2.0, 3 * st.sites[0].p2.se + 1e-3) << to_string(sch);
        EXPECT_NEAR(st.sites[0].q2.mean, 2.0, 3 * st.sites[0].q2.se + 1e-3) << to_string(sch);
    }
}

TEST(Langevin, EquilibriumFluxVanishesAndBalance)
{
    ChainParams cp = make_chain(5, 2.0, 1.0, 1.0, 1.0, 1.0, {0.5, 2.0, 0});
    Chain ch(cp);
    SimConfig sc;
    sc.dt = 0.01;
    sc.n_steps = 1000000;
    sc.burn_in = 10000;
    sc.seed = 9;
    auto st = run(ch, sc);
    for (const auto& b : st.bonds)
        EXPECT_LT(std::abs(b.cut.mean), 3.5 * b.cut.se + 1e-12);
    double sumR = 0.0, se2 = 0.0;
    for (const auto& s : st.sites) {
        sumR += s.R.mean;
        se2 += s.R.se * s.R.se;
    }
    EXPECT_LT(std::abs(sumR), 3.5 * std::sqrt(se2));
}

TEST(Langevin, NonequilibriumBalanceAndDtConvergence)
{
    ChainParams cp = make_chain(4, 2.0, 1.0, 1.0, 1.5, 0.5, {1.0, 2.0, 1});
    Chain ch(cp);
    SimConfig sc;
    sc.dt = 0.01;
    sc.n_steps = 1000000;
    sc.burn_in = 10000;
    sc.seed = 3;
    auto a = run(ch, sc);
    // energy balance: bath input equals zero on average
    double sumR = 0.0, se2 = 0.0;
    for (const auto& s : a.sites) {
        sumR += s.R.mean;
        se2 += s.R.se * s.R.se;
    }
    EXPECT_LT(std::abs(sumR), 3.5 * std::sqrt(se2));
    // halving dt moves <p^2> by less than the statistical error
    sc.dt = 0.005;
    sc.n_steps = 2000000;
    sc.burn_in = 20000;
    auto b = run(ch, sc);
    for (std::size_t j = 0; j < 4; ++j) {
        double se = std::hypot(a.sites[j].p2.se, b.sites[j].p2.se);
        EXPECT_LT(std::abs(a.sites[j].p2.mean - b.sites[j].p2.mean), 3.5 * se) << "site " << j;
    }
}
