#include "nasdag/validity.hpp"

#include <algorithm>
#include <map>

#include "nasdag/finalizer.hpp"

namespace nasdag {

const char* to_string(Reason r) {
    switch (r) {
        case Reason::ok: return "ok";
        case Reason::bad_signature: return "bad-signature";
        case Reason::wrong_draw: return "wrong-draw";
        case Reason::bad_structure: return "bad-structure";
        case Reason::below_threshold: return "below-threshold";
        case Reason::mixed_block: return "mixed-block";
        case Reason::mixed_slot: return "mixed-slot";
        case Reason::duplicate_index: return "duplicate-index";
        case Reason::invalid_endorsement: return "invalid-endorsement";
        case Reason::no_certificate: return "no-certificate";
        case Reason::cert_wrong_parent: return "cert-wrong-parent";
        case Reason::cert_period_mismatch: return "cert-period-mismatch";
        case Reason::parent_not_older: return "parent-not-older";
        case Reason::parents_incompatible: return "parents-incompatible";
        case Reason::grandparent_inconsistent: return "grandparent-inconsistent";
        case Reason::too_early: return "too-early";
        case Reason::wrong_producer: return "wrong-producer";
        case Reason::oversized: return "oversized";
        case Reason::wrong_shard: return "wrong-shard";
        case Reason::bad_denunciation: return "bad-denunciation";
        case Reason::stale_parent: return "stale-parent";
        case Reason::conflicts_finalized: return "conflicts-finalized";
    }
    return "unknown";
}

static bool endorsement_structure_ok(const Endorsement& e, const ProtocolParams& p) {
    return e.slot.thread < p.threads && e.index < p.endorsers;
}

Reason check_endorsement(const Endorsement& e, ValidationContext& ctx) {
    if (!endorsement_structure_ok(e, ctx.params)) return Reason::bad_structure;
    if (ctx.committee.endorser(e.slot, e.index) != e.endorser) return Reason::wrong_draw;
    if (!ctx.verifier.verify(e.sig, e.endorser, e.payload)) return Reason::bad_signature;
    return Reason::ok;
}

Reason check_certificate(const Certificate& c, ValidationContext& ctx) {
    if (c.endorsements.size() < ctx.params.threshold) return Reason::below_threshold;
    std::vector<bool> seen(ctx.params.endorsers, false);
    for (const auto& e : c.endorsements) {
        if (e.endorsed != c.endorsed) return Reason::mixed_block;
        if (e.slot != c.slot) return Reason::mixed_slot;
        if (!endorsement_structure_ok(e, ctx.params)) return Reason::invalid_endorsement;
        if (seen[e.index]) return Reason::duplicate_index;
        seen[e.index] = true;
    }
    for (const auto& e : c.endorsements) {
        if (ctx.committee.endorser(e.slot, e.index) != e.endorser) return Reason::invalid_endorsement;
    }
    for (const auto& e : c.endorsements) {
        if (ctx.known && ctx.known(e)) continue;
        if (!ctx.verifier.verify(e.sig, e.endorser, e.payload)) return Reason::invalid_endorsement;
    }
    return Reason::ok;
}

Reason check_transaction(const Transaction& tx, std::uint32_t thread, ValidationContext& ctx) {
    if (ctx.params.shard_of(tx.sender) != thread) return Reason::wrong_shard;
    if (!ctx.verifier.verify(tx.sig, tx.sender, tx.expected_payload())) return Reason::bad_signature;
    return Reason::ok;
}

Reason check_denunciation(const Denunciation& d, ValidationContext& ctx) {
    if (d.a.content == d.b.content) return Reason::bad_denunciation;
    if (d.slot.thread >= ctx.params.threads || d.slot.period == 0) return Reason::bad_denunciation;
    MsgDomain domain;
    if (d.kind == Denunciation::Kind::double_block) {
        if (d.index != 0 || ctx.committee.producer(d.slot) != d.offender) return Reason::bad_denunciation;
        domain = MsgDomain::block;
    } else {
        if (d.index >= ctx.params.endorsers || ctx.committee.endorser(d.slot, d.index) != d.offender)
            return Reason::bad_denunciation;
        domain = MsgDomain::endorsement;
    }
    for (const Evidence* ev : {&d.a, &d.b}) {
        const Digest payload = signing_payload(domain, d.slot, d.index, ev->content);
        if (!ctx.verifier.verify(ev->sig, d.offender, payload)) return Reason::bad_denunciation;
    }
    return Reason::ok;
}

static std::optional<Certificate> group_to_cert(const Slot& slot, const BlockId& block,
                                                std::vector<const Endorsement*> group,
                                                std::uint32_t threshold) {
    std::sort(group.begin(), group.end(),
              [](const Endorsement* a, const Endorsement* b) { return a->index < b->index; });
    group.erase(std::unique(group.begin(), group.end(),
                            [](const Endorsement* a, const Endorsement* b) { return a->index == b->index; }),
                group.end());
    if (group.size() < threshold || group.empty()) return std::nullopt;
    Certificate c;
    c.slot = slot;
    c.endorsed = block;
    c.endorsements.reserve(group.size());
    for (const auto* e : group) c.endorsements.push_back(*e);
    return c;
}

std::optional<Certificate> build_cert(std::span<const Endorsement> pool, std::uint32_t threshold) {
    if (pool.empty()) return std::nullopt;
    std::map<BlockId, std::vector<const Endorsement*>> groups;
    for (const auto& e : pool) groups[e.endorsed].push_back(&e);
    const BlockId* best = nullptr;
    std::size_t best_size = 0;
    for (auto& [id, g] : groups) {
        std::vector<std::uint32_t> idx;
        for (const auto* e : g) idx.push_back(e->index);
        std::sort(idx.begin(), idx.end());
        const auto distinct = static_cast<std::size_t>(std::unique(idx.begin(), idx.end()) - idx.begin());
        if (best == nullptr || distinct > best_size) {
            best = &id;
            best_size = distinct;
        }
    }
    return group_to_cert(pool.front().slot, *best, groups[*best], threshold);
}

std::optional<Certificate> build_cert_for(std::span<const Endorsement> pool, const BlockId& block,
                                          std::uint32_t threshold) {
    std::vector<const Endorsement*> group;
    for (const auto& e : pool)
        if (e.endorsed == block) group.push_back(&e);
    if (group.empty()) return std::nullopt;
    const Slot slot = group.front()->slot;
    return group_to_cert(slot, block, std::move(group), threshold);
}

bool parents_older_than_block(const Block& b, const ChainView& view) {
    for (const auto& p : b.parents) {
        const auto s = view.g.slot_of(p.id);
        if (!s || *s != p.slot || !(p.slot < b.slot)) return false;
    }
    return true;
}

bool parents_mutually_compatible(const Block& b, const ChainView& view) {
    for (std::size_t i = 0; i < b.parents.size(); ++i) {
        for (std::size_t j = i + 1; j < b.parents.size(); ++j) {
            const auto& pi = b.parents[i].id;
            const auto& pj = b.parents[j].id;
            if (view.g.is_final(pi) || view.g.is_final(pj)) continue;
            if (!view.gc.adjacent(pi, pj)) return false;
        }
    }
    return true;
}

bool grandparent_older_than_parent(const Block& b, const ChainView& view) {
    for (std::size_t t1 = 0; t1 < b.parents.size(); ++t1) {
        const auto* gps = view.g.parents_of(b.parents[t1].id);
        if (gps == nullptr || gps->empty()) continue;
        for (std::size_t t2 = 0; t2 < b.parents.size(); ++t2) {
            if (t1 == t2) continue;
            const ParentRef& gp = (*gps)[t2];
            const ParentRef& p = b.parents[t2];
            if (p.slot < gp.slot) return false;
            if (!view.g.is_ancestor_or_self(gp.id, p.id)) return false;
        }
    }
    return true;
}

Reason certificates_endorse_right_parent(const Block& b) {
    const ParentRef& tp = b.thread_parent();
    const bool genesis_parent = tp.slot.period == 0;
    if (b.certificates.empty() && !genesis_parent) return Reason::no_certificate;
    bool same_period = genesis_parent;
    for (const auto& c : b.certificates) {
        if (c.endorsed != tp.id) return Reason::cert_wrong_parent;
        if (c.slot.thread != b.slot.thread || !(c.slot < b.slot)) return Reason::cert_period_mismatch;
        if (c.slot == tp.slot) same_period = true;
    }
    return same_period ? Reason::ok : Reason::cert_period_mismatch;
}

Reason check_block_header(const Block& b, ValidationContext& ctx, TimeMs now) {
    const auto& p = ctx.params;
    if (b.slot.thread >= p.threads || b.slot.period == 0 || b.parents.size() != p.threads)
        return Reason::bad_structure;
    for (std::uint32_t t = 0; t < p.threads; ++t)
        if (b.parents[t].slot.thread != t) return Reason::bad_structure;
    for (const auto& c : b.certificates)
        if (c.slot.thread >= p.threads) return Reason::bad_structure;
    if (p.slot_time(b.slot) > now + p.clock_skew) return Reason::too_early;
    if (ctx.committee.producer(b.slot) != b.producer) return Reason::wrong_producer;
    if (b.encoded_size * 8 > p.max_block_bits) return Reason::oversized;
    for (const auto& op : b.operations)
        if (const auto* tx = std::get_if<Transaction>(&op); tx && p.shard_of(tx->sender) != b.slot.thread)
            return Reason::wrong_shard;
    if (!ctx.verifier.verify(b.sig, b.producer, b.payload)) return Reason::bad_signature;
    return Reason::ok;
}

std::vector<BlockId> missing_parents(const Block& b, const ChainView& view) {
    std::vector<BlockId> out;
    for (const auto& p : b.parents)
        if (!view.g.contains(p.id) && !view.stale.count(p.id)) out.push_back(p.id);
    return out;
}

Reason check_block_body(const Block& b, ValidationContext& ctx, const ChainView& view) {
    if (Reason r = certificates_endorse_right_parent(b); r != Reason::ok) return r;
    for (const auto& c : b.certificates)
        if (Reason r = check_certificate(c, ctx); r != Reason::ok) return r;
    for (const auto& p : b.parents)
        if (view.stale.count(p.id) || !view.g.contains(p.id)) return Reason::stale_parent;
    if (!parents_older_than_block(b, view)) return Reason::parent_not_older;
    if (conflicts_with_final(b, view.g, ctx.params.threads, ctx.params.t0))
        return Reason::conflicts_finalized;
    if (!parents_mutually_compatible(b, view)) return Reason::parents_incompatible;
    if (!grandparent_older_than_parent(b, view)) return Reason::grandparent_inconsistent;
    for (const auto& op : b.operations) {
        if (const auto* tx = std::get_if<Transaction>(&op)) {
            if (Reason r = check_transaction(*tx, b.slot.thread, ctx); r != Reason::ok) return r;
        } else if (check_denunciation(std::get<Denunciation>(op), ctx) != Reason::ok) {
            return Reason::bad_denunciation;
        }
    }
    return Reason::ok;
}

Verdict is_valid_block(const Block& b, ValidationContext& ctx, const ChainView& view, TimeMs now) {
    if (Reason r = check_block_header(b, ctx, now); r != Reason::ok) return Verdict::reject(r);
    if (auto missing = missing_parents(b, view); !missing.empty()) return Verdict::defer(std::move(missing));
    if (Reason r = check_block_body(b, ctx, view); r != Reason::ok) return Verdict::reject(r);
    return Verdict::accept();
}

}  // namespace nasdag
