#include <gtest/gtest.h>

#include <algorithm>
#include <functional>
#include <map>
#include <random>
#include <set>

#include "nasdag/clique.hpp"
#include "nasdag/finalizer.hpp"
#include "support.hpp"

using namespace nasdag;
using namespace nasdag::test;

namespace {

constexpr TimeMs kT0 = 16000;

VertexSet row(std::size_t n, std::initializer_list<std::size_t> bits) {
    VertexSet s(n);
    for (auto b : bits) s.set(b);
    return s;
}

std::vector<VertexSet> from_edges(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
    std::vector<VertexSet> adj(n, VertexSet(n));
    for (auto [a, b] : edges) {
        adj[a].set(b);
        adj[b].set(a);
    }
    return adj;
}

/// Maximal cliques by enumerating every subset.
std::set<std::vector<std::size_t>> power_set_cliques(const std::vector<VertexSet>& adj) {
    const std::size_t n = adj.size();
    std::vector<std::uint32_t> cliques;
    for (std::uint32_t m = 1; m < (1u << n); ++m) {
        bool ok = true;
        for (std::size_t i = 0; i < n && ok; ++i)
            for (std::size_t j = i + 1; j < n && ok; ++j)
                if ((m >> i & 1) && (m >> j & 1) && !adj[i].test(j)) ok = false;
        if (ok) cliques.push_back(m);
    }
    std::set<std::vector<std::size_t>> out;
    for (auto m : cliques) {
        bool maximal = true;
        for (auto o : cliques)
            if (o != m && (o & m) == m) maximal = false;
        if (!maximal) continue;
        std::vector<std::size_t> v;
        for (std::size_t i = 0; i < n; ++i)
            if (m >> i & 1) v.push_back(i);
        out.insert(v);
    }
    return out;
}

/// Strict ancestry by depth-first search over every parent edge.
bool reaches(const BlockGraph& g, const BlockId& a, const BlockId& d) {
    const auto* ps = g.parents_of(d);
    if (ps == nullptr) return false;
    for (const auto& p : *ps)
        if (p.id == a || reaches(g, a, p.id)) return true;
    return false;
}

/// Random block DAG with consistent parent views: for any two parents, the
/// thread-t parent of one is an ancestor-or-self of the other's thread-t parent.
std::vector<BlockPtr> random_dag(std::mt19937_64& rng, Graphs& gr, std::size_t count, std::uint64_t max_period) {
    std::vector<std::vector<BlockPtr>> by_thread(gr.threads);
    for (std::uint32_t t = 0; t < gr.threads; ++t) by_thread[t].push_back(make_block_ptr(Block::genesis(t)));
    auto anc_or_self = [&](const ParentRef& a, const BlockPtr& d) { return a.id == d->id || reaches(gr.g, a.id, d->id); };
    // q's view of thread t must not run ahead of candidate c in thread t.
    auto consistent = [&](const BlockPtr& q, const BlockPtr& c) {
        return q->is_genesis() || anc_or_self(q->parents[c->slot.thread], c);
    };
    std::vector<Slot> slots;
    for (std::size_t i = 0; i < 4 * count; ++i)
        slots.push_back(Slot{static_cast<std::uint32_t>(rng() % gr.threads), 1 + rng() % max_period});
    std::sort(slots.begin(), slots.end());
    std::vector<BlockPtr> out;
    std::uint64_t salt = 1;
    for (std::size_t i = 0; i < slots.size() && out.size() < count; i += 1 + rng() % 4) {
        const Slot s = slots[i];
        std::vector<BlockPtr> chosen;
        for (std::uint32_t t = 0; t < gr.threads; ++t) {
            std::vector<BlockPtr> cands;
            for (const auto& c : by_thread[t]) {
                if (!(c->slot < s)) continue;
                bool ok = true;
                for (const auto& q : chosen) ok = ok && consistent(q, c) && consistent(c, q);
                if (ok) cands.push_back(c);
            }
            if (cands.empty()) break;
            chosen.push_back(cands[rng() % cands.size()]);
        }
        if (chosen.size() != gr.threads) continue;
        std::vector<ParentRef> ps;
        for (const auto& c : chosen) ps.push_back(pref(c));
        auto b = raw_block(s, ps, salt++);
        gr.add(b);
        by_thread[s.thread].push_back(b);
        out.push_back(b);
    }
    EXPECT_EQ(out.size(), count);
    return out;
}

}  // namespace

TEST(BlockGraph, AppendCountsParentEdges) {
    Graphs gr(4);
    EXPECT_EQ(gr.g.active_count(), 4u);
    auto b = raw_block(Slot{2, 1}, genesis_parents(4));
    const auto before = gr.g.edge_count();
    EXPECT_TRUE(gr.g.append(b));
    EXPECT_EQ(gr.g.edge_count(), before + 4);
    EXPECT_FALSE(gr.g.append(b));
    EXPECT_EQ(gr.g.edge_count(), before + 4);
    for (std::uint32_t t = 0; t < 4; ++t) {
        EXPECT_TRUE(gr.g.is_ancestor(Block::genesis(t).id, b->id));
        EXPECT_EQ(gr.g.children(Block::genesis(t).id), std::vector<BlockId>{b->id});
    }
    EXPECT_FALSE(gr.g.is_ancestor(b->id, b->id));
    EXPECT_TRUE(gr.g.is_ancestor_or_self(b->id, b->id));
}

TEST(BlockGraph, TopologicalOrderOfRandomDag) {
    std::mt19937_64 rng(21);
    Graphs gr(4);
    const auto blocks = random_dag(rng, gr, 200, 60);
    const auto order = gr.g.topological_order();
    ASSERT_EQ(order.size(), 204u);
    std::map<BlockId, std::size_t> pos;
    for (std::size_t i = 0; i < order.size(); ++i) pos[order[i]] = i;
    for (const auto& b : blocks)
        for (const auto& p : b->parents) EXPECT_LT(pos.at(p.id), pos.at(b->id));

    for (int i = 0; i < 300; ++i) {
        const auto& a = blocks[rng() % blocks.size()];
        const auto& d = blocks[rng() % blocks.size()];
        EXPECT_EQ(gr.g.is_ancestor(a->id, d->id), reaches(gr.g, a->id, d->id));
    }
}

TEST(CompatGraph, ChainIsComplete) {
    Graphs gr(1);
    auto prev = make_block_ptr(Block::genesis(0));
    std::vector<BlockPtr> chain{prev};
    for (std::uint64_t p = 1; p <= 5; ++p) chain.push_back(prev = gr.add(raw_block(Slot{0, p}, {pref(prev)})));
    for (std::size_t i = 0; i < chain.size(); ++i)
        for (std::size_t j = i + 1; j < chain.size(); ++j) EXPECT_TRUE(gr.gc.adjacent(chain[i]->id, chain[j]->id));
    const auto rep = gr.report();
    ASSERT_EQ(rep.cliques.size(), 1u);
    EXPECT_EQ(rep.blockclique_fitness(), 6u);
}

TEST(CompatGraph, ParallelRule) {
    Graphs gr(2);
    auto a = gr.add(raw_block(Slot{0, 1}, genesis_parents(2)));
    auto b = gr.add(raw_block(Slot{1, 1}, genesis_parents(2)));
    EXPECT_TRUE(gr.gc.adjacent(a->id, b->id));
    // Same slot, same thread parent: a fork.
    auto a2 = gr.add(raw_block(Slot{0, 1}, genesis_parents(2), 7));
    EXPECT_FALSE(gr.gc.adjacent(a->id, a2->id));
    EXPECT_TRUE(gr.gc.adjacent(a2->id, b->id));
    // A full period apart without ancestry: no edge.
    auto far = gr.add(raw_block(Slot{1, 2}, genesis_parents(2), 8));
    EXPECT_FALSE(gr.gc.adjacent(a->id, far->id));
    EXPECT_EQ(gr.report().cliques.size(), 3u);
}

TEST(CompatGraph, IncompatibilityIsInherited) {
    Graphs gr(2);
    auto a = gr.add(raw_block(Slot{0, 1}, genesis_parents(2), 1));
    auto a2 = gr.add(raw_block(Slot{0, 1}, genesis_parents(2), 2));
    auto c = gr.add(raw_block(Slot{1, 1}, {pref(a), ParentRef{Block::genesis(1).id, Slot{1, 0}}}));
    EXPECT_TRUE(gr.gc.adjacent(a->id, c->id));
    EXPECT_FALSE(gr.gc.adjacent(a2->id, c->id));
}

TEST(CompatGraph, MatchesRecursiveDefinitionOnRandomDags) {
    std::mt19937_64 rng(22);
    for (int round = 0; round < 40; ++round) {
        const std::uint32_t threads = round % 2 == 0 ? 2 : 4;
        Graphs gr(threads, kT0);
        const auto blocks = random_dag(rng, gr, 14, 5);
        std::map<BlockId, std::size_t> order;
        std::map<BlockId, BlockPtr> by_id;
        for (std::uint32_t t = 0; t < threads; ++t) {
            order[Block::genesis(t).id] = t;
            by_id[Block::genesis(t).id] = make_block_ptr(Block::genesis(t));
        }
        for (std::size_t i = 0; i < blocks.size(); ++i) {
            order[blocks[i]->id] = threads + i;
            by_id[blocks[i]->id] = blocks[i];
        }
        auto time_of = [&](const Slot& s) { return static_cast<TimeMs>(s.period) * kT0 + s.thread * (kT0 / threads); };
        std::map<std::pair<BlockId, BlockId>, bool> memo;
        // x is compatible with an older y when each parent of x is y or
        // compatible with y, and y is an ancestor of x or runs in parallel.
        std::function<bool(const BlockId&, const BlockId&)> compat = [&](const BlockId& x0, const BlockId& y0) {
            if (x0 == y0) return true;
            const BlockId x = order[x0] > order[y0] ? x0 : y0;
            const BlockId y = order[x0] > order[y0] ? y0 : x0;
            auto key = std::make_pair(x, y);
            if (auto it = memo.find(key); it != memo.end()) return it->second;
            const auto& bx = *by_id[x];
            const auto& by = *by_id[y];
            bool r;
            if (bx.is_genesis()) {
                r = by.is_genesis();
            } else {
                r = true;
                for (const auto& p : bx.parents) r = r && compat(p.id, y);
                if (r) {
                    const TimeMs dt = std::abs(time_of(bx.slot) - time_of(by.slot));
                    const bool same_parent = !by.is_genesis() && bx.thread_parent().id == by.thread_parent().id;
                    r = reaches(gr.g, y, x) || (dt < kT0 && !same_parent);
                }
            }
            return memo[key] = r;
        };
        for (const auto& [i, bi] : by_id)
            for (const auto& [j, bj] : by_id)
                if (i < j) EXPECT_EQ(gr.gc.adjacent(i, j), compat(i, j)) << "round " << round;
        // Cliques of the report agree with the power-set oracle.
        const auto rep = gr.report();
        std::set<std::vector<std::size_t>> got;
        for (const auto& c : rep.cliques) got.insert(members(c));
        EXPECT_EQ(got, power_set_cliques(rep.adjacency)) << "round " << round;
    }
}

TEST(CompatGraph, SpeculativeCertificateSharesEndorsedNeighbourhood) {
    Graphs gr(2);
    auto a = gr.add(raw_block(Slot{0, 1}, genesis_parents(2), 1));
    auto a2 = gr.add(raw_block(Slot{0, 1}, genesis_parents(2), 2));
    const CertKey k{a->slot, a->id};
    gr.gc.add_speculative(k);
    gr.gc.add_speculative(k);
    EXPECT_EQ(gr.gc.certificate_count(), 1u);
    EXPECT_TRUE(gr.gc.is_speculative_only(k));
    const auto rep = gr.report();
    const std::size_t cv = rep.vertices.size() - 1;
    ASSERT_TRUE(rep.vertices[cv].is_cert);
    auto expect = rep.adjacency[*rep.index_of(a->id)];
    expect.set(*rep.index_of(a->id));
    expect.reset(cv);
    EXPECT_EQ(rep.adjacency[cv], expect);
    EXPECT_FALSE(rep.adjacency[cv].test(*rep.index_of(a2->id)));
}

TEST(CompatGraph, IncludedCertificateFollowsContainer) {
    Graphs gr(2);
    auto a = gr.add(raw_block(Slot{0, 1}, genesis_parents(2)));
    auto c = gr.add(raw_block(Slot{0, 2}, {pref(a), ParentRef{Block::genesis(1).id, Slot{1, 0}}}));
    auto rival = gr.add(raw_block(Slot{0, 2}, {pref(a), ParentRef{Block::genesis(1).id, Slot{1, 0}}}, 3));
    const CertKey k{a->slot, a->id};
    gr.gc.add_speculative(k);
    gr.gc.include_certificate(k, c->id);
    gr.gc.include_certificate(k, c->id);
    EXPECT_EQ(gr.gc.certificate_count(), 1u);
    EXPECT_FALSE(gr.gc.is_speculative_only(k));
    auto rep = gr.report();
    const std::size_t cv = rep.vertices.size() - 1;
    auto expect = rep.adjacency[*rep.index_of(c->id)];
    expect.set(*rep.index_of(c->id));
    expect.reset(cv);
    EXPECT_EQ(rep.adjacency[cv], expect);
    EXPECT_FALSE(rep.adjacency[cv].test(*rep.index_of(rival->id)));

    // Container gone stale: the certificate falls back to the speculative anchor.
    gr.g.remove(c->id);
    gr.gc.remove_block(c->id, false);
    EXPECT_TRUE(gr.gc.is_speculative_only(k));
    rep = gr.report();
    EXPECT_TRUE(rep.adjacency.back().test(*rep.index_of(rival->id)));
}

TEST(Cliques, CompleteGraphIsOneClique) {
    std::vector<std::pair<std::size_t, std::size_t>> e;
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = i + 1; j < 5; ++j) e.emplace_back(i, j);
    const auto cl = maximal_cliques(from_edges(5, e));
    ASSERT_EQ(cl.size(), 1u);
    EXPECT_EQ(cl[0].count(), 5u);
}

TEST(Cliques, TwoForksGiveTwoCliques) {
    // 0 - 1, forks 2 and 3 each linked to 0 and 1 but not to each other.
    const auto cl = maximal_cliques(from_edges(4, {{0, 1}, {0, 2}, {1, 2}, {0, 3}, {1, 3}}));
    ASSERT_EQ(cl.size(), 2u);
    EXPECT_EQ(members(cl[0]), (std::vector<std::size_t>{0, 1, 2}));
    EXPECT_EQ(members(cl[1]), (std::vector<std::size_t>{0, 1, 3}));
}

TEST(Cliques, EdgelessGraphs) {
    EXPECT_TRUE(maximal_cliques({}).empty());
    const auto cl = maximal_cliques(from_edges(3, {}));
    EXPECT_EQ(cl.size(), 3u);
    for (const auto& c : cl) EXPECT_EQ(c.count(), 1u);
}

TEST(Cliques, OverflowIsReported) {
    // Complement of a perfect matching on 2k vertices has 2^k maximal cliques.
    const std::size_t k = 6;
    std::vector<std::pair<std::size_t, std::size_t>> e;
    for (std::size_t i = 0; i < 2 * k; ++i)
        for (std::size_t j = i + 1; j < 2 * k; ++j)
            if (!(i % 2 == 0 && j == i + 1)) e.emplace_back(i, j);
    EXPECT_EQ(maximal_cliques(from_edges(2 * k, e), 64).size(), 64u);
    EXPECT_THROW(maximal_cliques(from_edges(2 * k, e), 63), CliqueOverflow);
}

TEST(Cliques, RandomGraphsMatchPowerSet) {
    std::mt19937_64 rng(23);
    for (int round = 0; round < 200; ++round) {
        const std::size_t n = 1 + rng() % 12;
        const double density = 0.2 + 0.7 * static_cast<double>(rng() % 100) / 100.0;
        std::vector<std::pair<std::size_t, std::size_t>> e;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j)
                if (static_cast<double>(rng() % 1000) / 1000.0 < density) e.emplace_back(i, j);
        const auto adj = from_edges(n, e);
        std::set<std::vector<std::size_t>> got;
        const auto cl = maximal_cliques(adj);
        for (const auto& c : cl) got.insert(members(c));
        EXPECT_EQ(got.size(), cl.size());
        EXPECT_EQ(got, power_set_cliques(adj));
    }
}

TEST(Blockclique, GenesisAndChildHaveFitnessTwo) {
    Graphs gr(1);
    auto b = gr.add(raw_block(Slot{0, 1}, genesis_parents(1)));
    auto rep = gr.report();
    ASSERT_EQ(rep.cliques.size(), 1u);
    EXPECT_EQ(rep.blockclique_fitness(), 2u);
    gr.gc.add_speculative(CertKey{b->slot, b->id});
    rep = gr.report();
    EXPECT_EQ(rep.blockclique_fitness(), 3u);
}

TEST(Blockclique, SpeculativeCertificateBreaksForkTie) {
    Graphs gr(1);
    auto a = gr.add(raw_block(Slot{0, 1}, genesis_parents(1), 1));
    auto b = gr.add(raw_block(Slot{0, 1}, genesis_parents(1), 2));
    auto rep = gr.report();
    ASSERT_EQ(rep.cliques.size(), 2u);
    EXPECT_EQ(rep.clique_fitness[0], rep.clique_fitness[1]);
    // Equal fitness: the smaller digest sum wins, genesis being common.
    const auto& smaller = a->id < b->id ? a : b;
    const auto& larger = a->id < b->id ? b : a;
    EXPECT_TRUE(rep.in_blockclique(smaller->id));
    gr.gc.add_speculative(CertKey{larger->slot, larger->id});
    rep = gr.report();
    EXPECT_TRUE(rep.in_blockclique(larger->id));
    EXPECT_EQ(rep.blockclique_fitness(), 3u);
}

TEST(Blockclique, TieBreakOrder) {
    auto id = [](std::uint8_t last) {
        BlockId b{};
        b.bytes[31] = last;
        return b;
    };
    EXPECT_EQ(digest_sum({id(0x0a), id(0x01)}), 0x0b);
    std::vector<VertexSet> cl{row(3, {0, 1}), row(3, {0, 2})};
    using boost::multiprecision::cpp_int;
    // Fitness first.
    EXPECT_EQ(select_blockclique(cl, {2, 3}, {cpp_int(1), cpp_int(9)}), 1u);
    // Then the smaller digest sum: 0x0a beats 0x0b.
    EXPECT_EQ(select_blockclique(cl, {2, 2}, {digest_sum({id(0x0b)}), digest_sum({id(0x0a)})}), 1u);
    // Forced collision: the lexicographically smaller member list.
    EXPECT_EQ(select_blockclique(cl, {2, 2}, {cpp_int(5), cpp_int(5)}), 0u);
    std::vector<VertexSet> rev{row(3, {0, 2}), row(3, {0, 1})};
    EXPECT_EQ(select_blockclique(rev, {2, 2}, {cpp_int(5), cpp_int(5)}), 1u);
    EXPECT_TRUE(members_less(row(4, {0, 1, 3}), row(4, {0, 2})));
    EXPECT_TRUE(members_less(row(4, {0, 1}), row(4, {0, 1, 2})));
}

TEST(Fitness, DescendantCreditExamples) {
    Graphs gr(1);
    auto b1 = gr.add(raw_block(Slot{0, 1}, genesis_parents(1)));
    auto rep = gr.report();
    const auto g0 = Block::genesis(0).id;
    EXPECT_EQ(rep.fitness_of(*rep.index_of(g0), rep.best), 1u);
    EXPECT_EQ(rep.fitness_of(*rep.index_of(b1->id), rep.best), 0u);
    auto b2 = gr.add(raw_block(Slot{0, 2}, {pref(b1)}));
    auto b3 = gr.add(raw_block(Slot{0, 3}, {pref(b2)}));
    gr.gc.add_speculative(CertKey{b3->slot, b3->id});
    rep = gr.report();
    EXPECT_EQ(rep.fitness_of(*rep.index_of(g0), rep.best), 4u);
    EXPECT_EQ(rep.fitness_of(*rep.index_of(b3->id), rep.best), 1u);
}

TEST(Finalize, ChainWithZeroMargin) {
    Graphs gr(1);
    auto b1 = gr.add(raw_block(Slot{0, 1}, genesis_parents(1)));
    auto b2 = gr.add(raw_block(Slot{0, 2}, {pref(b1)}));
    auto b3 = gr.add(raw_block(Slot{0, 3}, {pref(b2)}));
    const auto r = classify(gr.g, gr.report(), 0);
    EXPECT_EQ(r.finalized, (std::vector<BlockId>{Block::genesis(0).id, b1->id, b2->id}));
    EXPECT_TRUE(r.stale.empty());
    const auto r1 = classify(gr.g, gr.report(), 1);
    EXPECT_EQ(r1.finalized, (std::vector<BlockId>{Block::genesis(0).id, b1->id}));
}

TEST(Finalize, EqualForksStayPending) {
    Graphs gr(1);
    auto a = gr.add(raw_block(Slot{0, 1}, genesis_parents(1), 1));
    auto b = gr.add(raw_block(Slot{0, 1}, genesis_parents(1), 2));
    const auto r = classify(gr.g, gr.report(), 0);
    EXPECT_EQ(r.finalized, std::vector<BlockId>{Block::genesis(0).id});
    EXPECT_TRUE(r.stale.empty());
}

TEST(Finalize, TrailingBranchGoesStale) {
    Graphs gr(1);
    auto a = gr.add(raw_block(Slot{0, 1}, genesis_parents(1), 1));
    auto loser = gr.add(raw_block(Slot{0, 1}, genesis_parents(1), 2));
    auto c = gr.add(raw_block(Slot{0, 2}, {pref(a)}));
    auto d = gr.add(raw_block(Slot{0, 3}, {pref(c)}));
    auto tail = gr.add(raw_block(Slot{0, 2}, {pref(loser)}, 3));
    // Cliques {g,a,c,d} = 4 and {g,loser,tail} = 3.
    EXPECT_TRUE(classify(gr.g, gr.report(), 1).stale.empty());
    auto r = finalize_step(gr.g, gr.gc, gr.report(), 0);
    EXPECT_EQ(r.stale, (std::vector<BlockId>{loser->id, tail->id}));
    EXPECT_EQ(r.finalized, std::vector<BlockId>{Block::genesis(0).id});
    EXPECT_FALSE(gr.g.contains(loser->id));
    EXPECT_FALSE(gr.gc.has_block(tail->id));
    r = finalize_step(gr.g, gr.gc, gr.report(), 0);
    EXPECT_EQ(r.finalized, (std::vector<BlockId>{a->id, c->id}));
    EXPECT_TRUE(gr.g.is_final(c->id));
    EXPECT_TRUE(gr.g.is_active(d->id));

    // A new fork of the finalized prefix is rejected.
    auto late = raw_block(Slot{0, 4}, {pref(a)}, 4);
    EXPECT_TRUE(conflicts_with_final(*late, gr.g, 1, kT0));
    auto ok = raw_block(Slot{0, 4}, {pref(d)});
    EXPECT_FALSE(conflicts_with_final(*ok, gr.g, 1, kT0));
}
