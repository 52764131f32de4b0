#include <benchmark/benchmark.h>

#include <random>

#include "nasdag/analysis.hpp"
#include "nasdag/clique.hpp"
#include "nasdag/netsim.hpp"
#include "nasdag/scenario.hpp"
#include "support.hpp"

using namespace nasdag;

static void BM_MaximalCliques(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    std::mt19937_64 rng(1);
    std::vector<VertexSet> adj(n, VertexSet(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (rng() % 4 != 0) {
                adj[i].set(j);
                adj[j].set(i);
            }
    for (auto _ : state) benchmark::DoNotOptimize(maximal_cliques(adj, 1 << 20));
}
BENCHMARK(BM_MaximalCliques)->Arg(8)->Arg(16)->Arg(32);

static void BM_BinomTail(benchmark::State& state) {
    const auto e = static_cast<std::uint32_t>(state.range(0));
    const auto k = analysis::quorum_size(e, analysis::Rational(2, 3));
    for (auto _ : state) benchmark::DoNotOptimize(analysis::binom_tail(e, k, analysis::Rational(1, 3)));
}
BENCHMARK(BM_BinomTail)->Arg(32)->Arg(96)->Arg(160);

static void BM_CommitteeDraw(benchmark::State& state) {
    std::map<Address, Coins> stakes;
    for (std::uint64_t i = 0; i < 64; ++i) stakes[address_of_secret(sha256("s" + std::to_string(i)))] = 1000 + i;
    const StakeTable table(stakes);
    const Digest seed = sha256("bench");
    const auto count = static_cast<std::uint32_t>(state.range(0));
    std::uint64_t period = 0;
    for (auto _ : state) benchmark::DoNotOptimize(committee_endorsers(Slot{0, ++period}, table, seed, count));
}
BENCHMARK(BM_CommitteeDraw)->Arg(16)->Arg(96);

static void BM_EndorsementVerify(benchmark::State& state) {
    ProtocolParams p;
    p.threads = 2;
    p.endorsers = 16;
    p.threshold = 11;
    test::World w(p, 8, 1);
    Verifier v(w.registry);
    ValidationContext ctx{w.params, *w.committee, v};
    const Slot s{0, 1};
    const auto e = w.endorse(s, 0, Block::genesis(0).id);
    for (auto _ : state) benchmark::DoNotOptimize(check_endorsement(e, ctx));
}
BENCHMARK(BM_EndorsementVerify);

static void BM_CanonicalScenario(benchmark::State& state) {
    auto cfg = load_scenario(std::string(NASDAG_SOURCE_DIR) + "/scenarios/canonical.yaml");
    cfg.periods = static_cast<std::uint64_t>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(run_scenario(cfg).digest());
}
BENCHMARK(BM_CanonicalScenario)->Arg(20)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
