#include "nasdag/finalizer.hpp"

#include <unordered_set>

namespace nasdag {

FinalizeResult classify(const BlockGraph& g, const CliqueReport& rep, std::uint64_t delta_f) {
    FinalizeResult out;
    if (rep.empty()) return out;
    const auto best = static_cast<std::int64_t>(rep.blockclique_fitness());
    const auto margin = static_cast<std::int64_t>(delta_f);
    std::unordered_set<BlockId> final_now;
    std::unordered_set<BlockId> stale_now;

    for (const auto& id : g.topological_order()) {
        auto v = rep.index_of(id);
        if (!v) continue;
        bool in_all = true;
        std::int64_t best_containing = -1;
        std::uint64_t best_descendant = 0;
        for (std::size_t c = 0; c < rep.cliques.size(); ++c) {
            if (!rep.cliques[c].test(*v)) {
                in_all = false;
                continue;
            }
            best_containing = std::max(best_containing, static_cast<std::int64_t>(rep.clique_fitness[c]));
            best_descendant = std::max(best_descendant, rep.fitness_of(*v, c));
        }
        bool stale_parent = false;
        bool parents_final = true;
        for (const auto& p : *g.parents_of(id)) {
            if (stale_now.count(p.id)) stale_parent = true;
            if (!g.is_final(p.id) && !final_now.count(p.id)) parents_final = false;
        }
        if (stale_parent || (!in_all && best_containing < best - margin)) {
            stale_now.insert(id);
            out.stale.push_back(id);
        } else if (in_all && best_descendant > delta_f && parents_final) {
            final_now.insert(id);
            out.finalized.push_back(id);
        }
    }
    return out;
}

FinalizeResult finalize_step(BlockGraph& g, CompatGraph& gc, const CliqueReport& rep,
                             std::uint64_t delta_f) {
    FinalizeResult out = classify(g, rep, delta_f);
    for (const auto& id : out.finalized) {
        g.mark_final(id);
        gc.remove_block(id, true);
    }
    // Cascade staleness to descendants, children before removal of the parent.
    std::vector<BlockId> queue = out.stale;
    std::unordered_set<BlockId> seen(queue.begin(), queue.end());
    for (std::size_t i = 0; i < queue.size(); ++i) {
        for (const auto& ch : g.children(queue[i]))
            if (seen.insert(ch).second) {
                queue.push_back(ch);
                out.stale.push_back(ch);
            }
    }
    for (const auto& id : queue) {
        g.remove(id);
        gc.remove_block(id, false);
    }
    return out;
}

static TimeMs slot_time(const Slot& s, std::uint32_t threads, TimeMs t0) {
    return static_cast<TimeMs>(s.period) * t0 + static_cast<TimeMs>(s.thread) * (t0 / threads);
}

bool conflicts_with_final(const Block& b, const BlockGraph& g, std::uint32_t threads, TimeMs t0) {
    if (b.is_genesis()) return false;
    const TimeMs tb = slot_time(b.slot, threads, t0);
    for (std::uint32_t t = 0; t < threads; ++t) {
        const auto lf = g.latest_final(t);
        if (!lf) continue;
        const ParentRef& p = b.parents[t];
        if (!g.is_final(p.id)) continue;
        // Walk final blocks of thread t that are newer than b's parent there.
        BlockId x = *lf;
        while (x != p.id) {
            const FinalRecord* rec = g.final_record(x);
            if (rec == nullptr || rec->slot <= p.slot) return true;
            const TimeMs tx = slot_time(rec->slot, threads, t0);
            const TimeMs dt = tb > tx ? tb - tx : tx - tb;
            const bool same_thread_parent =
                !rec->parents.empty() && rec->parents[rec->slot.thread].id == b.parents[b.slot.thread].id;
            if (!(dt < t0) || same_thread_parent) return true;
            if (rec->parents.empty()) return true;
            x = rec->parents[t].id;
        }
    }
    return false;
}

}  // namespace nasdag
