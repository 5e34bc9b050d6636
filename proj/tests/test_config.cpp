#include <heatchain/config.hpp>

#include <gtest/gtest.h>

#include <cstdio>
#include <fstream>

using namespace heatchain;

namespace {

json chain_json()
{
    return json::parse(R"({"N": 4, "M": 2.0, "lambda": 0.5, "zeta": [1.0, 0.1, 0.1, 1.0],
                           "T_left": 1.2, "T_right": 0.8, "coupling": {"J": 0.3, "p": 2, "range": 1}})");
}

json polymer_json()
{
    return json::parse(R"({"zeta": 20, "M": 300, "lambda": 1e6, "J": 1, "T": 1, "slices": 2, "sites": 2,
                           "insertions": [[0, 0], [3, 0]], "level": {"m_q": 8, "m_p": 4}})");
}

json sweep_json()
{
    return json::parse(R"({"N": 9, "M": 2, "lambda": 1, "coupling": {"J": 1, "range": 1},
                           "zeta_boundary": 1, "zeta_interior": 0.01, "temps": [1, 2, 4, 8],
                           "selfconsistent": {"tol": 1e-3, "eta": 1},
                           "production": {"dt": 0.01, "n_steps": 1000, "scheme": "splitting"}})");
}

} // namespace

TEST(Config, ChainParsesAndResolves)
{
    auto cp = parse_chain(chain_json());
    EXPECT_EQ(cp.N, 4u);
    EXPECT_EQ(cp.M, std::vector<double>(4, 2.0));
    EXPECT_DOUBLE_EQ(cp.T[0], 1.2);
    EXPECT_DOUBLE_EQ(cp.T[3], 0.8);
    EXPECT_EQ(cp.coupling.range, 1u);
    auto again = parse_chain(to_json(cp));
    EXPECT_EQ(to_json(again), to_json(cp));
}

TEST(Config, RejectsUnknownKeys)
{
    auto j = chain_json();
    j["lamda"] = 1.0;
    EXPECT_THROW(parse_chain(j), ValidationError);
    auto p = polymer_json();
    p["epsilon"] = 0.05;
    EXPECT_THROW(parse_polymer(p), ValidationError);
    auto s = sweep_json();
    s["production"]["steps"] = 10;
    EXPECT_THROW(parse_sweep(s), ValidationError);
}

TEST(Config, PhysicsParametersAreRequired)
{
    for (const char* k : {"M", "lambda", "zeta", "coupling"}) {
        auto j = chain_json();
        j.erase(k);
        EXPECT_THROW(parse_chain(j), ValidationError) << k;
    }
    for (const char* k : {"zeta", "M", "lambda", "J", "T"}) {
        auto j = polymer_json();
        j.erase(k);
        EXPECT_THROW(parse_polymer(j), ValidationError) << k;
    }
    auto s = sweep_json();
    s.erase("zeta_interior");
    EXPECT_THROW(parse_sweep(s), ValidationError);
}

TEST(Config, RejectsBadValues)
{
    auto j = chain_json();
    j["periodic"] = true;
    EXPECT_THROW(parse_chain(j), ValidationError);
    j = chain_json();
    j["zeta"] = json::array({1.0, 0.1});
    EXPECT_THROW(parse_chain(j), ValidationError);
    j = chain_json();
    j["T"] = 1.0;
    EXPECT_THROW(parse_chain(j), ValidationError);
    auto p = polymer_json();
    p["insertions"] = json::parse("[[0, 0]]");
    EXPECT_THROW(parse_polymer(p), ValidationError);
    p = polymer_json();
    p["insertions"] = json::parse("[[0, 2], [1, 0]]");
    EXPECT_THROW(parse_polymer(p), ValidationError);
    auto sim = json::parse(R"({"dt": 0.01, "n_steps": 10, "scheme": "rk4"})");
    EXPECT_THROW(parse_sim(sim), ValidationError);
}

TEST(Config, SimDefaults)
{
    auto s = parse_sim(json::parse(R"({"dt": 0.01, "n_steps": 1000})"));
    EXPECT_EQ(s.burn_in, 100u);
    EXPECT_EQ(s.scheme, Scheme::Euler);
    EXPECT_EQ(s.batch_count, 20u);
}

TEST(Config, PolymerRoundTrip)
{
    auto c = parse_polymer(polymer_json());
    EXPECT_EQ(c.lattice.size(), 4u);
    ASSERT_TRUE(c.engine.fixed_level.has_value());
    EXPECT_EQ(c.engine.fixed_level->m_q, 8u);
    ASSERT_EQ(c.insertions.size(), 2u);
    EXPECT_EQ(c.insertions[1].cell, 3u);
    auto again = parse_polymer(to_json(c));
    EXPECT_EQ(to_json(again), to_json(c));
    // the resolved c1 is pinned in the round trip
    EXPECT_DOUBLE_EQ(*again.params.c1, c.params.c1_value());
}

TEST(Config, SweepRoundTrip)
{
    auto s = parse_sweep(sweep_json());
    EXPECT_EQ(s.solver.sim.n_steps, 1000u); // solver_sim falls back to production
    EXPECT_DOUBLE_EQ(s.solver.tol, 1e-3);
    EXPECT_EQ(s.production.scheme, Scheme::Splitting);
    EXPECT_EQ(to_json(parse_sweep(to_json(s))), to_json(s));
}

TEST(Config, LoadsFilesAndManifests)
{
    const std::string path = testing::TempDir() + "heatchain_cfg.json";
    {
        std::ofstream(path) << json{{"manifest_version", 1}, {"config", {{"chain", chain_json()}}}}.dump();
    }
    auto root = load_config(path);
    EXPECT_EQ(parse_chain(section(root, "chain")).N, 4u);
    EXPECT_THROW(section(root, "sweep"), ValidationError);
    {
        std::ofstream(path) << "{ not json";
    }
    EXPECT_THROW(load_config(path), ValidationError);
    std::remove(path.c_str());
    EXPECT_THROW(load_config(path), ValidationError);
}
