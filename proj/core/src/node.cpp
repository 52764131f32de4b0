#include "nasdag/node.hpp"

#include <algorithm>

#include "nasdag/finalizer.hpp"

namespace nasdag {

namespace {
constexpr std::uint64_t kEndorsementRetention = 16;
constexpr std::size_t kMaxTxPerBlock = 16;
constexpr int kParentFixpointLimit = 64;
}  // namespace

const char* to_string(MsgTag t) {
    switch (t) {
        case MsgTag::block: return "BLOCK";
        case MsgTag::endorsement: return "ENDORSEMENT";
        case MsgTag::certificate: return "CERTIFICATE";
        case MsgTag::request_block: return "REQUEST-BLOCK";
    }
    return "?";
}

Message Message::of_block(BlockPtr b) {
    Message m;
    m.tag = MsgTag::block;
    m.block = std::move(b);
    return m;
}

Message Message::of_endorsements(std::vector<Endorsement> es) {
    Message m;
    m.tag = MsgTag::endorsement;
    m.endorsements = std::make_shared<const std::vector<Endorsement>>(std::move(es));
    return m;
}

Message Message::of_certificate(Certificate c) {
    Message m;
    m.tag = MsgTag::certificate;
    m.certificate = std::make_shared<const Certificate>(std::move(c));
    return m;
}

Message Message::of_request(const BlockId& id) {
    Message m;
    m.tag = MsgTag::request_block;
    m.requested = id;
    return m;
}

Node::Node(NodeId id, const ProtocolParams& params, std::shared_ptr<const Committee> committee,
           const KeyRegistry& registry, const Signer& signer, const Ledger& genesis)
    : id_(id),
      params_(params),
      committee_(std::move(committee)),
      registry_(&registry),
      signer_(signer),
      verifier_(registry),
      g_(params.threads),
      gc_(params.threads, params.t0, params.clique_cap),
      ledger_(genesis),
      mempool_(params.threads) {
    for (std::uint32_t t = 0; t < params_.threads; ++t) {
        auto gb = make_block_ptr(Block::genesis(t));
        g_.append(gb);
        g_.mark_final(gb->id);
        g_.final_record(gb->id)->executed = true;
    }
}

ValidationContext Node::context() {
    ValidationContext ctx{params_, *committee_, verifier_, nullptr};
    ctx.known = [this](const Endorsement& e) {
        auto s = endorsements_.find(e.slot);
        if (s == endorsements_.end()) return false;
        auto i = s->second.find(e.index);
        return i != s->second.end() && i->second.same_as(e);
    };
    return ctx;
}

void Node::emit(Outbox& out, Envelope e) {
    ++metrics_.out[static_cast<std::size_t>(e.msg.tag)];
    out.push_back(std::move(e));
}

const CliqueReport& Node::clique_report() {
    if (dirty_) {
        report_ = gc_.report(g_);
        dirty_ = false;
    }
    return report_;
}

BlockPtr Node::held_body(const BlockId& id) const {
    if (auto b = g_.body(id)) return b;
    if (auto it = deferred_.find(id); it != deferred_.end()) return it->second;
    if (auto it = expired_.find(id); it != expired_.end()) return it->second;
    return nullptr;
}

std::uint64_t Node::settled_period() const {
    std::uint64_t p = UINT64_MAX;
    for (std::uint32_t t = 0; t < params_.threads; ++t) p = std::min(p, g_.latest_final_period(t).value_or(0));
    return p;
}

Digest Node::final_prefix_digest(std::uint64_t up_to_period) const {
    Sha256 h;
    h.update("final-prefix");
    for (std::uint64_t p = 1; p <= up_to_period; ++p) {
        for (std::uint32_t t = 0; t < params_.threads; ++t) {
            if (auto id = g_.final_at(Slot{t, p})) {
                h.update_u32(t);
                h.update_u64(p);
                h.update(*id);
            }
        }
    }
    return h.finish();
}

Outbox Node::on_message(NodeId from, const Message& m, TimeMs now) {
    ++metrics_.in[static_cast<std::size_t>(m.tag)];
    switch (m.tag) {
        case MsgTag::block: return handle_block(from, m.block, now);
        case MsgTag::endorsement: return handle_endorsements(*m.endorsements, now);
        case MsgTag::certificate: return handle_certificate(*m.certificate, now);
        case MsgTag::request_block: return handle_request_block(from, m.requested);
    }
    return {};
}

void Node::request(const BlockId& id, TimeMs now, Outbox& out) {
    if (requests_.count(id)) return;
    requests_[id] = now + params_.request_expiry();
    ++metrics_.requests_sent;
    emit(out, Envelope{Message::of_request(id), std::nullopt});
}

void Node::note_block_broadcast(const Slot& s, bool requested) {
    if (requested) return;
    if (++broadcasts_[s] > 1) ++metrics_.rebroadcast_violations;
}

void Node::record_block_denunciation(const Occupant& first, const Block& second) {
    if (block_denunciations_.count(second.slot)) return;
    Denunciation d;
    d.kind = Denunciation::Kind::double_block;
    d.slot = second.slot;
    d.index = 0;
    d.offender = second.producer;
    d.a = first.evidence;
    d.b = Evidence{retag<Digest>(second.id), second.sig};
    if (d.b.content < d.a.content) std::swap(d.a, d.b);
    block_denunciations_.emplace(second.slot, d);
}

Outbox Node::handle_block(NodeId, const BlockPtr& bp, TimeMs now) {
    Outbox out;
    const Block& b = *bp;
    if (b.is_genesis() || g_.contains(b.id) || stale_.count(b.id) || deferred_.count(b.id) || expired_.count(b.id))
        return out;
    if (b.slot.period < horizon_) return out;

    const bool requested = requests_.count(b.id) != 0;
    auto occ = occupants_.find(b.slot);
    const bool conflicting = occ != occupants_.end() && occ->second.id != b.id;
    auto ctx = context();
    if (conflicting && !requested) {
        ++metrics_.blocks_conflicting;
        if (!block_denunciations_.count(b.slot) && b.slot.thread < params_.threads &&
            committee_->producer(b.slot) == b.producer && verifier_.verify(b.sig, b.producer, b.payload))
            record_block_denunciation(occ->second, b);
        return out;
    }

    if (Reason r = check_block_header(b, ctx, now); r != Reason::ok) {
        ++metrics_.blocks_rejected;
        ++metrics_.rejections[r];
        return out;
    }
    if (conflicting)
        record_block_denunciation(occ->second, b);
    else if (occ == occupants_.end())
        occupants_.emplace(b.slot, Occupant{b.id, Evidence{retag<Digest>(b.id), b.sig}});
    requests_.erase(b.id);

    std::vector<BlockId> pending;
    for (const auto& p : b.parents) {
        auto ex = expired_.find(p.id);
        if (ex == expired_.end()) continue;
        const CertKey key{ex->second->slot, p.id};
        auto own = std::find_if(b.certificates.begin(), b.certificates.end(), [&](const Certificate& c) {
            return CertKey{c.slot, c.endorsed} == key;
        });
        if (own != b.certificates.end() && !certs_.count(key) && check_certificate(*own, ctx) == Reason::ok)
            certs_.emplace(key, *own);
        if (certs_.count(key) && revive(p.id, now, out)) continue;
        pending.push_back(p.id);
    }
    if (!pending.empty()) {
        deferred_.emplace(b.id, bp);
        deferred_requested_[b.id] = requested;
        ++metrics_.blocks_deferred;
        for (const auto& x : pending) {
            waiting_[x].push_back(b.id);
            request(x, now, out);
        }
        return out;
    }

    if (auto missing = missing_parents(b, view()); !missing.empty()) {
        deferred_.emplace(b.id, bp);
        deferred_requested_[b.id] = requested;
        ++metrics_.blocks_deferred;
        for (const auto& m : missing) {
            waiting_[m].push_back(b.id);
            request(m, now, out);
        }
        return out;
    }

    std::vector<Slot> accepted;
    integrate(bp, requested, now, out, accepted);
    run_finalizer();
    for (const auto& s : accepted) {
        if (passive_) break;
        if (g_.slot_of(endorsement_target(s)) != s) continue;
        auto more = endorse_slot(s, now);
        out.insert(out.end(), std::make_move_iterator(more.begin()), std::make_move_iterator(more.end()));
    }
    return out;
}

void Node::integrate(const BlockPtr& first, bool first_requested, TimeMs, Outbox& out,
                     std::vector<Slot>& accepted_slots) {
    std::vector<std::pair<BlockPtr, bool>> work{{first, first_requested}};
    while (!work.empty()) {
        auto [bp, requested] = work.back();
        work.pop_back();
        const Block& b = *bp;
        auto ctx = context();
        if (Reason r = check_block_body(b, ctx, view()); r != Reason::ok) {
            ++metrics_.blocks_rejected;
            ++metrics_.rejections[r];
            if (r == Reason::stale_parent) mark_stale(b.id);
            continue;
        }
        g_.append(bp);
        gc_.add_block(b, g_);
        for (const auto& c : b.certificates) {
            const CertKey key{c.slot, c.endorsed};
            for (const auto& e : c.endorsements) endorsements_[e.slot].try_emplace(e.index, e);
            certs_.try_emplace(key, c);
            if (g_.is_active(c.endorsed)) gc_.include_certificate(key, b.id);
        }
        for (auto it = certs_.lower_bound(CertKey{Slot{0, b.slot.period}, BlockId{}}); it != certs_.end(); ++it)
            if (it->first.endorsed == b.id) gc_.add_speculative(it->first);
        dirty_ = true;
        ++metrics_.blocks_accepted;
        accepted_slots.push_back(b.slot);
        note_block_broadcast(b.slot, requested);
        emit(out, Envelope{Message::of_block(bp), std::nullopt});

        auto w = waiting_.find(b.id);
        if (w == waiting_.end()) continue;
        auto children = std::move(w->second);
        waiting_.erase(w);
        for (const auto& cid : children) {
            auto d = deferred_.find(cid);
            if (d == deferred_.end()) continue;
            if (!missing_parents(*d->second, view()).empty()) continue;
            work.emplace_back(d->second, deferred_requested_[cid]);
            deferred_.erase(d);
            deferred_requested_.erase(cid);
        }
    }
}

void Node::mark_stale(const BlockId& id) {
    std::vector<BlockId> queue{id};
    while (!queue.empty()) {
        BlockId x = queue.back();
        queue.pop_back();
        if (!stale_.insert(x).second) continue;
        ++metrics_.blocks_stale;
        std::optional<Slot> slot = g_.slot_of(x);
        if (!slot) {
            if (auto d = deferred_.find(x); d != deferred_.end()) slot = d->second->slot;
        }
        if (slot) stale_by_slot_[*slot].push_back(x);
        deferred_.erase(x);
        deferred_requested_.erase(x);
        if (auto w = waiting_.find(x); w != waiting_.end()) {
            for (const auto& c : w->second) queue.push_back(c);
            waiting_.erase(w);
        }
    }
}

void Node::expire_uncertified(TimeMs now) {
    const TimeMs grace = params_.t0 + params_.clock_skew;
    std::vector<BlockId> dead;
    for (const auto& [slot, ids] : g_.active_by_slot()) {
        if (params_.slot_time(slot) + grace >= now) break;
        for (const auto& id : ids)
            if (!certified_at_own_slot(id, slot)) dead.push_back(id);
    }
    if (dead.empty()) return;
    std::vector<BlockId> order;
    std::set<BlockId> seen;
    while (!dead.empty()) {
        BlockId x = dead.back();
        dead.pop_back();
        if (!g_.is_active(x) || !seen.insert(x).second) continue;
        order.push_back(x);
        for (const auto& c : g_.children(x)) dead.push_back(c);
    }
    std::sort(order.begin(), order.end(), [&](const BlockId& a, const BlockId& b) {
        return std::make_pair(*g_.slot_of(b), b) < std::make_pair(*g_.slot_of(a), a);
    });
    for (const auto& x : order) {
        expired_.emplace(x, g_.body(x));
        gc_.remove_block(x, false);
        g_.remove(x);
        ++metrics_.blocks_expired;
    }
    dirty_ = true;
    run_finalizer();
}

bool Node::revive(const BlockId& id, TimeMs now, Outbox& out) {
    auto it = expired_.find(id);
    if (it == expired_.end()) return g_.is_active(id);
    BlockPtr bp = it->second;
    for (const auto& p : bp->parents)
        if (!g_.contains(p.id)) return false;
    expired_.erase(it);
    ++metrics_.blocks_revived;
    std::vector<Slot> accepted;
    integrate(bp, true, now, out, accepted);
    return g_.is_active(id) || g_.is_final(id);
}

Outbox Node::handle_endorsements(const std::vector<Endorsement>& es, TimeMs now) {
    Outbox out;
    std::vector<Endorsement> fresh;
    std::set<CertKey> touched;
    auto ctx = context();
    for (const auto& e : es) {
        if (e.slot.period < horizon_ || e.slot.thread >= params_.threads) continue;
        auto per = endorsements_.find(e.slot);
        if (per != endorsements_.end()) {
            if (auto it = per->second.find(e.index); it != per->second.end()) {
                if (it->second.same_as(e)) continue;
                const auto key = std::make_pair(e.slot, e.index);
                if (endorsement_denunciations_.count(key)) continue;
                if (check_endorsement(e, ctx) != Reason::ok) {
                    ++metrics_.endorsements_rejected;
                    continue;
                }
                Denunciation d;
                d.kind = Denunciation::Kind::double_endorsement;
                d.slot = e.slot;
                d.index = e.index;
                d.offender = e.endorser;
                d.a = Evidence{it->second.content, it->second.sig};
                d.b = Evidence{e.content, e.sig};
                if (d.b.content < d.a.content) std::swap(d.a, d.b);
                endorsement_denunciations_.emplace(key, d);
                fresh.push_back(e);
                continue;
            }
        }
        if (Reason r = check_endorsement(e, ctx); r != Reason::ok) {
            ++metrics_.endorsements_rejected;
            continue;
        }
        endorsements_[e.slot].emplace(e.index, e);
        ++metrics_.endorsements_stored;
        fresh.push_back(e);
        touched.insert(CertKey{e.slot, e.endorsed});
    }
    if (!fresh.empty()) emit(out, Envelope{Message::of_endorsements(std::move(fresh)), std::nullopt});
    const auto certs_before = certs_.size();
    for (const auto& key : touched) try_form_certificate(key, now, out);
    if (certs_.size() != certs_before) run_finalizer();
    return out;
}

void Node::try_form_certificate(const CertKey& key, TimeMs now, Outbox& out) {
    if (certs_.count(key)) return;
    auto per = endorsements_.find(key.slot);
    if (per == endorsements_.end()) return;
    std::vector<Endorsement> pool;
    for (const auto& [i, e] : per->second)
        if (e.endorsed == key.endorsed) pool.push_back(e);
    auto c = build_cert_for(pool, key.endorsed, params_.threshold);
    if (!c) return;
    certs_.emplace(key, std::move(*c));
    ++metrics_.certs_formed;
    register_certificate(key, now, out, true);
}

void Node::register_certificate(const CertKey& key, TimeMs now, Outbox& out, bool broadcast) {
    if (auto ex = expired_.find(key.endorsed); ex != expired_.end() && ex->second->slot == key.slot)
        revive(key.endorsed, now, out);
    if (g_.is_active(key.endorsed)) {
        gc_.add_speculative(key);
        dirty_ = true;
    }
    if (holds(key.endorsed)) {
        if (broadcast) emit(out, Envelope{Message::of_certificate(certs_.at(key)), std::nullopt});
    } else if (!stale_.count(key.endorsed)) {
        request(key.endorsed, now, out);
    }
}

Outbox Node::handle_certificate(const Certificate& c, TimeMs now) {
    Outbox out;
    const CertKey key{c.slot, c.endorsed};
    if (certs_.count(key) || c.slot.period < horizon_) return out;
    auto ctx = context();
    if (Reason r = check_certificate(c, ctx); r != Reason::ok) {
        ++metrics_.certs_rejected;
        ++metrics_.rejections[r];
        return out;
    }
    for (const auto& e : c.endorsements) endorsements_[e.slot].try_emplace(e.index, e);
    certs_.emplace(key, c);
    ++metrics_.certs_received;
    emit(out, Envelope{Message::of_certificate(c), std::nullopt});
    register_certificate(key, now, out, false);
    run_finalizer();
    return out;
}

Outbox Node::handle_request_block(NodeId from, const BlockId& id) {
    Outbox out;
    if (auto b = held_body(id)) {
        ++metrics_.requests_answered;
        emit(out, Envelope{Message::of_block(b), from});
        if (auto c = certs_.find(CertKey{b->slot, id}); c != certs_.end())
            emit(out, Envelope{Message::of_certificate(c->second), from});
    }
    return out;
}

bool Node::certified_at_own_slot(const BlockId& id, const Slot& slot) const {
    return slot.period == 0 || certs_.count(CertKey{slot, id}) != 0;
}

std::optional<ParentRef> Node::pick_parent(std::uint32_t thread, const Slot& s, bool need_cert) {
    const auto& rep = clique_report();
    std::optional<ParentRef> best;
    if (!rep.empty()) {
        const auto& bc = rep.blockclique();
        for (std::size_t v = bc.find_first(); v != VertexSet::npos; v = bc.find_next(v)) {
            const auto& vx = rep.vertices[v];
            if (vx.is_cert) continue;
            const auto slot = g_.slot_of(vx.block);
            if (!slot || slot->thread != thread || !(*slot < s)) continue;
            if (need_cert && !certified_at_own_slot(vx.block, *slot)) continue;
            if (!best || best->slot < *slot) best = ParentRef{vx.block, *slot};
        }
    }
    if (best) return best;
    const auto lf = g_.latest_final(thread);
    if (!lf) return std::nullopt;
    const Slot fs = *g_.slot_of(*lf);
    if (!(fs < s)) return std::nullopt;
    if (need_cert && !certified_at_own_slot(*lf, fs)) return std::nullopt;
    return ParentRef{*lf, fs};
}

std::optional<Block> Node::assemble_block(const Slot& s, std::uint32_t depth) {
    const std::uint32_t T = params_.threads;
    std::vector<ParentRef> parents(T);
    for (std::uint32_t t = 0; t < T; ++t) {
        auto p = pick_parent(t, s, true);
        if (!p) return std::nullopt;
        parents[t] = *p;
    }

    if (depth > 0) {
        ParentRef x = parents[s.thread];
        for (std::uint32_t k = 0; k < depth && x.slot.period > 0; ++k) {
            const auto* ps = g_.parents_of(x.id);
            if (ps == nullptr) return std::nullopt;
            x = (*ps)[s.thread];
        }
        if (x.slot.period == 0) {
            for (std::uint32_t t = 0; t < T; ++t) parents[t] = ParentRef{Block::genesis(t).id, Slot{t, 0}};
        } else {
            const auto* ps = g_.parents_of(x.id);
            if (ps == nullptr) return std::nullopt;
            parents = *ps;
            parents[s.thread] = x;
        }
    } else {
        int iter = 0;
        for (; iter < kParentFixpointLimit; ++iter) {
            bool changed = false;
            for (std::uint32_t t1 = 0; t1 < T && !changed; ++t1) {
                const auto* gps = g_.parents_of(parents[t1].id);
                if (gps == nullptr || gps->empty()) continue;
                for (std::uint32_t t2 = 0; t2 < T && !changed; ++t2) {
                    if (t1 == t2) continue;
                    const ParentRef gp = (*gps)[t2];
                    const ParentRef& p2 = parents[t2];
                    if (!(p2.slot < gp.slot) && g_.is_ancestor_or_self(gp.id, p2.id)) continue;
                    if (t2 != s.thread)
                        parents[t2] = gp;
                    else
                        parents[t1] = (*gps)[t1];
                    changed = true;
                }
            }
            if (!changed) break;
        }
        if (iter == kParentFixpointLimit) return std::nullopt;
    }

    Block b;
    b.slot = s;
    b.parents = parents;
    b.producer = signer_.address();
    const ParentRef& tp = parents[s.thread];
    if (tp.slot.period > 0) {
        std::vector<const Certificate*> own, older;
        for (const auto& [key, c] : certs_) {
            if (key.endorsed != tp.id || key.slot.thread != s.thread || !(key.slot < s)) continue;
            (key.slot == tp.slot ? own : older).push_back(&c);
        }
        if (own.empty()) return std::nullopt;
        for (const auto* c : own) b.certificates.push_back(*c);
        for (const auto* c : older) b.certificates.push_back(*c);
    }

    for (const auto& [slot, d] : block_denunciations_)
        if (!ledger_.already_punished(d)) b.operations.emplace_back(d);
    for (const auto& [key, d] : endorsement_denunciations_)
        if (!ledger_.already_punished(d)) b.operations.emplace_back(d);
    auto& pool = mempool_[s.thread];
    while (!pool.empty()) {
        const auto* acc = ledger_.account(pool.front().sender);
        if (acc == nullptr || pool.front().nonce >= acc->next_nonce) break;
        pool.pop_front();
    }
    for (std::size_t i = 0; i < pool.size() && i < kMaxTxPerBlock; ++i) b.operations.emplace_back(pool[i]);

    b.sign_with(signer_);
    while (b.encoded_size * 8 > params_.max_block_bits) {
        if (!b.operations.empty())
            b.operations.pop_back();
        else if (b.certificates.size() > 1)
            b.certificates.pop_back();
        else
            return std::nullopt;
        b.sign_with(signer_);
    }
    return b;
}

Outbox Node::produce_block(const Slot& s, TimeMs now) {
    if (s.period == 0 || committee_->producer(s) != signer_.address()) return {};
    if (occupants_.count(s)) return {};
    auto b = assemble_block(s);
    if (!b) {
        ++metrics_.produce_failures;
        return {};
    }
    ++metrics_.blocks_produced;
    return handle_block(id_, make_block_ptr(std::move(*b)), now);
}

BlockId Node::endorsement_target(const Slot& s) {
    const auto& rep = clique_report();
    if (!rep.empty()) {
        const auto& bc = rep.blockclique();
        std::optional<ParentRef> best;
        for (std::size_t v = bc.find_first(); v != VertexSet::npos; v = bc.find_next(v)) {
            const auto& vx = rep.vertices[v];
            if (vx.is_cert) continue;
            const auto slot = g_.slot_of(vx.block);
            if (!slot || slot->thread != s.thread || s < *slot) continue;
            if (*slot == s) return vx.block;
            if (!certified_at_own_slot(vx.block, *slot)) continue;
            if (!best || best->slot < *slot) best = ParentRef{vx.block, *slot};
        }
        if (best) return best->id;
    }
    if (auto lf = g_.latest_final(s.thread)) return *lf;
    return Block::genesis(s.thread).id;
}

std::vector<Endorsement> Node::choose_endorsements(const Slot& s) {
    std::vector<Endorsement> out;
    if (s.period == 0) return out;
    std::optional<BlockId> target;
    for (auto i : committee_->indices_of(s, signer_.address())) {
        if (!endorsed_.insert({s, i}).second) continue;
        if (!target) target = endorsement_target(s);
        out.push_back(Endorsement::make(signer_, s, i, *target));
    }
    return out;
}

Outbox Node::endorse_slot(const Slot& s, TimeMs now) {
    auto es = choose_endorsements(s);
    if (es.empty()) return {};
    return handle_endorsements(es, now);
}

void Node::submit_transaction(const Transaction& tx) {
    const auto t = params_.shard_of(tx.sender);
    auto& pool = mempool_[t];
    auto pos = std::find_if(pool.begin(), pool.end(), [&](const Transaction& o) {
        return o.sender == tx.sender && o.nonce == tx.nonce;
    });
    if (pos == pool.end()) pool.push_back(tx);
}

void Node::run_finalizer() {
    for (int guard = 0; guard < 64; ++guard) {
        const auto& rep = clique_report();
        auto res = finalize_step(g_, gc_, rep, params_.delta_f);
        if (res.finalized.empty() && res.stale.empty()) break;
        dirty_ = true;
        metrics_.blocks_finalized += res.finalized.size();
        for (const auto& id : res.stale) mark_stale(id);
    }
    execute_settled();
    prune();
}

void Node::execute_settled() {
    const auto producer_of = [this](const BlockId& id) { return g_.producer_of(id); };
    while (true) {
        const Slot c = exec_cursor_;
        const auto lfp = g_.latest_final_period(c.thread);
        if (!lfp || *lfp < c.period) break;
        if (auto id = g_.final_at(c)) {
            FinalRecord* rec = g_.final_record(*id);
            if (rec->body && !rec->executed) {
                auto r = ledger_.execute(*rec->body, producer_of);
                rec->executed = true;
                ++metrics_.blocks_executed;
                metrics_.txs_applied += r.transactions_applied;
                metrics_.txs_skipped += r.transactions_skipped;
                metrics_.slashes += r.slashes;
                metrics_.minted += r.minted;
                metrics_.burned += r.burned;
                if (!r.conserved) ++metrics_.conservation_failures;
            }
        }
        exec_cursor_ = c.thread + 1 < params_.threads ? Slot{c.thread + 1, c.period} : Slot{0, c.period + 1};
    }
}

void Node::prune() {
    const std::uint64_t settled = settled_period();
    const std::uint64_t horizon = settled > kEndorsementRetention ? settled - kEndorsementRetention : 0;
    if (horizon <= horizon_) return;
    horizon_ = horizon;
    const Slot cut{0, horizon_};
    endorsements_.erase(endorsements_.begin(), endorsements_.lower_bound(cut));
    occupants_.erase(occupants_.begin(), occupants_.lower_bound(cut));
    broadcasts_.erase(broadcasts_.begin(), broadcasts_.lower_bound(cut));
    endorsed_.erase(endorsed_.begin(), endorsed_.lower_bound({cut, 0}));
    for (auto it = stale_by_slot_.begin(); it != stale_by_slot_.end() && it->first < cut;) {
        for (const auto& id : it->second) stale_.erase(id);
        it = stale_by_slot_.erase(it);
    }
    for (auto it = expired_.begin(); it != expired_.end();)
        it = it->second->slot < cut ? expired_.erase(it) : std::next(it);
    for (auto it = deferred_.begin(); it != deferred_.end();) {
        if (it->second->slot < cut) {
            deferred_requested_.erase(it->first);
            it = deferred_.erase(it);
        } else {
            ++it;
        }
    }
    for (auto it = certs_.begin(); it != certs_.end();) {
        const BlockId& e = it->first.endorsed;
        const auto lf = g_.latest_final(it->first.slot.thread);
        const bool keep = g_.is_active(e) || (lf && *lf == e) || deferred_.count(e) || expired_.count(e) ||
                          (!g_.contains(e) && !(it->first.slot < cut));
        it = keep ? std::next(it) : certs_.erase(it);
    }
    for (auto it = block_denunciations_.begin(); it != block_denunciations_.end();)
        it = ledger_.already_punished(it->second) ? block_denunciations_.erase(it) : std::next(it);
    for (auto it = endorsement_denunciations_.begin(); it != endorsement_denunciations_.end();)
        it = ledger_.already_punished(it->second) ? endorsement_denunciations_.erase(it) : std::next(it);
    g_.prune_bodies(horizon_);
}

Outbox Node::on_tick(TimeMs now) {
    Outbox out;
    for (auto it = requests_.begin(); it != requests_.end();)
        it = it->second <= now ? requests_.erase(it) : std::next(it);
    std::vector<BlockId> rerequest;
    for (const auto& [parent, children] : waiting_)
        if (!requests_.count(parent) && !g_.contains(parent) && !stale_.count(parent)) rerequest.push_back(parent);
    std::sort(rerequest.begin(), rerequest.end());
    for (const auto& id : rerequest) request(id, now, out);
    expire_uncertified(now);
    if (passive_) return out;

    const Slot ps = params_.time_to_slot(now);
    if (params_.slot_time(ps) == now) {
        auto more = produce_block(ps, now);
        out.insert(out.end(), std::make_move_iterator(more.begin()), std::make_move_iterator(more.end()));
    }
    const TimeMs half = params_.t0 / 2;
    if (now >= half) {
        const Slot es = params_.time_to_slot(now - half);
        if (params_.slot_time(es) + half == now) {
            auto more = endorse_slot(es, now);
            out.insert(out.end(), std::make_move_iterator(more.begin()), std::make_move_iterator(more.end()));
        }
    }
    return out;
}

}  // namespace nasdag
