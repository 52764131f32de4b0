#include <gtest/gtest.h>

#include "nasdag/netsim.hpp"
#include "nasdag/scenario.hpp"

using namespace nasdag;

namespace {

std::string scenario_path(const std::string& name) { return std::string(NASDAG_SOURCE_DIR) + "/scenarios/" + name + ".yaml"; }

ScenarioConfig small_withholder(std::uint64_t seed) {
    return parse_scenario(R"(
name: rare_withholder
seed: )" + std::to_string(seed) + R"(
periods: 40
eval_margin: 8
protocol: {threads: 2, t0_ms: 16000, endorsers: 8, threshold: 6, delta_f: 2}
nodes: {honest: 4, stake: 1000}
adversary: {strategy: withholder, beta: "1/1000"}
)");
}

}  // namespace

TEST(Netsim, CanonicalIsFullyLive) {
    auto cfg = load_scenario(scenario_path("canonical"));
    cfg.periods = 100;
    const auto r = run_scenario(cfg);
    EXPECT_DOUBLE_EQ(r.liveness, 1.0);
    EXPECT_TRUE(r.audits.safe());
    EXPECT_TRUE(r.audits.converged);
    EXPECT_EQ(r.audits.conservation_failures, 0u);
    EXPECT_GE(r.finalized_slots, 2u * 90);
}

TEST(Netsim, SameSeedSameDigest) {
    auto cfg = load_scenario(scenario_path("canonical"));
    cfg.periods = 30;
    const auto a = run_scenario(cfg);
    const auto b = run_scenario(cfg);
    EXPECT_EQ(a.digest(), b.digest());
    EXPECT_EQ(a.to_json(), b.to_json());
    cfg.seed += 1;
    EXPECT_NE(run_scenario(cfg).digest(), a.digest());
}

TEST(Netsim, PartitionHealCheck) {
    auto none = load_scenario(scenario_path("canonical"));
    none.periods = 40;
    EXPECT_TRUE(partition_heal_check(run_scenario(none)));
    EXPECT_TRUE(partition_heal_check(run_scenario(load_scenario(scenario_path("partition_heal")))));
    const auto stuck = run_scenario(load_scenario(std::string(NASDAG_SOURCE_DIR) + "/tests/fixtures/permanent_partition.yaml"));
    EXPECT_FALSE(partition_heal_check(stuck));
}

TEST(Netsim, EquivocationsDenouncedOncePerIndex) {
    // The attack window closes well before the end, so every denunciation executes.
    const auto r = run_scenario(load_scenario(scenario_path("equivocating_endorser")));
    ASSERT_GT(r.equivocations, 0u);
    for (const auto& n : r.nodes) {
        if (!n.honest) continue;
        EXPECT_EQ(n.metrics.slashes, r.equivocations) << "node " << n.id;
    }
    EXPECT_TRUE(r.audits.safe());
}

TEST(Netsim, WithholderNeverDrawnLeavesLivenessIntact) {
    bool found = false;
    for (std::uint64_t seed = 1; seed <= 50 && !found; ++seed) {
        Simulation sim(small_withholder(seed));
        const auto adv = sim.adversary_address();
        ASSERT_TRUE(adv);
        bool drawn = false;
        for (std::uint64_t p = 1; p <= sim.config().periods && !drawn; ++p)
            for (std::uint32_t t = 0; t < 2 && !drawn; ++t) {
                const Slot s{t, p};
                drawn = sim.committee().producer(s) == *adv || !sim.committee().indices_of(s, *adv).empty();
            }
        if (drawn) continue;
        found = true;
        sim.run();
        const auto r = sim.report();
        EXPECT_DOUBLE_EQ(r.liveness, 1.0) << "seed " << seed;
    }
    EXPECT_TRUE(found);
}
