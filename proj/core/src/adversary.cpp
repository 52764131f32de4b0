#include "nasdag/adversary.hpp"

#include <algorithm>

namespace nasdag {

const char* to_string(Strategy s) {
    switch (s) {
        case Strategy::honest: return "honest";
        case Strategy::withholder: return "withholder";
        case Strategy::multi_staker: return "multi_staker";
        case Strategy::flooder: return "flooder";
        case Strategy::fork_attacker: return "fork_attacker";
        case Strategy::equivocating_endorser: return "equivocating_endorser";
    }
    return "?";
}

std::optional<Strategy> parse_strategy(std::string_view name) {
    for (auto s : {Strategy::honest, Strategy::withholder, Strategy::multi_staker, Strategy::flooder,
                   Strategy::fork_attacker, Strategy::equivocating_endorser})
        if (name == to_string(s)) return s;
    return std::nullopt;
}

Adversary::Adversary(std::unique_ptr<Node> view, AdversaryParams params, std::vector<Signer> ground,
                     std::vector<NodeId> peers)
    : view_(std::move(view)), params_(params), ground_(std::move(ground)), peers_(std::move(peers)) {}

Outbox Adversary::filter_view_output(Outbox out) const {
    Outbox kept;
    for (auto& e : out)
        if (e.to || e.msg.tag == MsgTag::request_block) kept.push_back(std::move(e));
    return kept;
}

void Adversary::archive(const Message& m) {
    if (params_.strategy != Strategy::fork_attacker) return;
    auto keep = [&](const Certificate& c) { archived_certs_.try_emplace(CertKey{c.slot, c.endorsed}, c); };
    if (m.tag == MsgTag::block && m.block->producer != address()) {
        archive_.try_emplace(m.block->slot, m.block);
        for (const auto& c : m.block->certificates) keep(c);
    } else if (m.tag == MsgTag::certificate) {
        keep(*m.certificate);
    }
    const auto period = view_->settled_period();
    constexpr std::uint64_t kKeep = 64;
    if (period <= kKeep) return;
    archive_.erase(archive_.begin(), archive_.lower_bound(Slot{0, period - kKeep}));
    archived_certs_.erase(archived_certs_.begin(), archived_certs_.lower_bound(CertKey{Slot{0, period - kKeep}, BlockId{}}));
}

std::optional<Block> Adversary::fork_from_archive(const Slot& s) const {
    const std::uint32_t T = view_->params().threads;
    BlockPtr tip;
    for (auto it = archive_.begin(); it != archive_.end() && it->first < s; ++it)
        if (it->first.thread == s.thread) tip = it->second;
    if (!tip) return std::nullopt;
    ParentRef x = tip->thread_parent();
    for (std::uint32_t k = 1; k < params_.depth && x.slot.period > 0; ++k) {
        auto body = archive_.find(x.slot);
        if (body == archive_.end() || body->second->id != x.id) return std::nullopt;
        x = body->second->thread_parent();
    }
    Block b;
    b.slot = s;
    if (x.slot.period == 0) {
        for (std::uint32_t t = 0; t < T; ++t) b.parents.push_back(ParentRef{Block::genesis(t).id, Slot{t, 0}});
        b.sign_with(view_->signer());
        return b;
    }
    auto body = archive_.find(x.slot);
    auto cert = archived_certs_.find(CertKey{x.slot, x.id});
    if (body == archive_.end() || body->second->id != x.id || cert == archived_certs_.end()) return std::nullopt;
    b.parents = body->second->parents;
    b.parents[s.thread] = x;
    b.certificates.push_back(cert->second);
    b.sign_with(view_->signer());
    return b;
}

Outbox Adversary::on_message(NodeId from, const Message& m, TimeMs now) {
    archive(m);
    const bool active = params_.strategy != Strategy::honest &&
                        params_.attacking(view_->params().time_to_slot(now).period);
    Outbox out;
    if (m.tag == MsgTag::request_block && !(active && params_.strategy == Strategy::withholder)) {
        if (auto it = store_.find(m.requested); it != store_.end()) {
            out.push_back(Envelope{Message::of_block(it->second), from});
            return out;
        }
    }
    auto vo = view_->on_message(from, m, now);
    if (!active) return vo;
    if (params_.strategy == Strategy::withholder) return {};
    return filter_view_output(std::move(vo));
}

std::vector<BlockPtr> Adversary::make_variants(const Slot& s, std::uint32_t count) {
    std::vector<BlockPtr> out;
    auto base = view_->assemble_block(s);
    if (!base) return out;
    for (std::uint32_t j = 0; j < count; ++j) {
        Block b = *base;
        b.operations.emplace_back(
            Transaction::make(ground_.at(s.thread), address(), (Coins{1} << 62) + j, 0, 0));
        b.sign_with(view_->signer());
        auto bp = make_block_ptr(std::move(b));
        store_.emplace(bp->id, bp);
        out.push_back(bp);
    }
    return out;
}

void Adversary::act_as_producer(const Slot& s, TimeMs now, Outbox& out) {
    switch (params_.strategy) {
        case Strategy::multi_staker:
        case Strategy::flooder: {
            const std::uint32_t m = std::max<std::uint32_t>(params_.versions, 1);
            auto variants = make_variants(s, m);
            if (variants.empty()) return;
            produced_[s] = variants;
            for (std::size_t k = 0; k < peers_.size(); ++k)
                for (std::uint32_t j = 0; j < m; ++j)
                    out.push_back(Envelope{Message::of_block(variants[(k + j) % m]), peers_[k]});
            if (params_.strategy == Strategy::flooder) {
                const std::uint32_t E = view_->params().endorsers;
                const auto own = view_->committee().indices_of(s, address());
                std::vector<Endorsement> fakes;
                for (std::uint64_t j = 0; j < std::uint64_t{m} * E; ++j) {
                    const auto idx = static_cast<std::uint32_t>(j % E);
                    if (std::find(own.begin(), own.end(), idx) != own.end()) continue;
                    fakes.push_back(Endorsement::make(view_->signer(), s, idx, variants[(j / E) % m]->id));
                }
                if (!fakes.empty())
                    out.push_back(Envelope{Message::of_endorsements(std::move(fakes)), std::nullopt});
            }
            return;
        }
        case Strategy::fork_attacker: {
            auto b = view_->assemble_block(s, params_.depth);
            if (!b) b = fork_from_archive(s);
            if (!b) return;
            auto bp = make_block_ptr(std::move(*b));
            store_.emplace(bp->id, bp);
            produced_[s] = {bp};
            view_->handle_block(view_->id(), bp, now);
            out.push_back(Envelope{Message::of_block(bp), std::nullopt});
            return;
        }
        case Strategy::equivocating_endorser: {
            auto o = view_->produce_block(s, now);
            out.insert(out.end(), o.begin(), o.end());
            return;
        }
        case Strategy::honest:
        case Strategy::withholder: return;
    }
}

void Adversary::act_as_endorser(const Slot& s, TimeMs now, Outbox& out) {
    const auto own = view_->committee().indices_of(s, address());
    if (own.empty()) return;
    auto produced = produced_.find(s);
    switch (params_.strategy) {
        case Strategy::multi_staker:
        case Strategy::flooder: {
            if (produced == produced_.end()) break;
            const auto& variants = produced->second;
            const std::size_t m = variants.size();
            std::vector<std::vector<Endorsement>> per_variant(m);
            for (std::size_t j = 0; j < m; ++j)
                for (auto idx : own) per_variant[j].push_back(Endorsement::make(view_->signer(), s, idx, variants[j]->id));
            equivocations_ += own.size() * (m - 1);
            for (std::size_t k = 0; k < peers_.size(); ++k) {
                std::vector<Endorsement> batch;
                batch.reserve(m * own.size());
                for (std::size_t j = 0; j < m; ++j) {
                    const auto& es = per_variant[(k + j) % m];
                    batch.insert(batch.end(), es.begin(), es.end());
                }
                out.push_back(Envelope{Message::of_endorsements(std::move(batch)), peers_[k]});
            }
            return;
        }
        case Strategy::fork_attacker: {
            if (produced == produced_.end()) break;
            std::vector<Endorsement> es;
            for (auto idx : own) es.push_back(Endorsement::make(view_->signer(), s, idx, produced->second.front()->id));
            view_->handle_endorsements(es, now);
            out.push_back(Envelope{Message::of_endorsements(std::move(es)), std::nullopt});
            return;
        }
        case Strategy::equivocating_endorser: {
            const BlockId a = view_->endorsement_target(s);
            const auto* parents = view_->graph().parents_of(a);
            if (parents == nullptr || parents->empty()) break;
            const BlockId b = (*parents)[s.thread].id;
            std::vector<Endorsement> ea, eb;
            for (auto idx : own) {
                ea.push_back(Endorsement::make(view_->signer(), s, idx, a));
                eb.push_back(Endorsement::make(view_->signer(), s, idx, b));
            }
            equivocations_ += own.size();
            const std::size_t half = peers_.size() / 2;
            for (std::size_t k = 0; k < peers_.size(); ++k)
                out.push_back(Envelope{Message::of_endorsements(k < half ? ea : eb), peers_[k]});
            return;
        }
        case Strategy::honest:
        case Strategy::withholder: return;
    }
    auto o = view_->endorse_slot(s, now);
    out.insert(out.end(), o.begin(), o.end());
}

Outbox Adversary::on_tick(TimeMs now) {
    const auto& p = view_->params();
    const Slot current = p.time_to_slot(now);
    const bool active = params_.strategy != Strategy::honest && params_.attacking(current.period);
    view_->set_passive(active);
    Outbox out = view_->on_tick(now);
    if (!active) return out;
    if (params_.strategy == Strategy::withholder) return {};
    out = filter_view_output(std::move(out));

    if (p.slot_time(current) == now && current.period > 0 && view_->committee().producer(current) == address())
        act_as_producer(current, now, out);
    const TimeMs half = p.t0 / 2;
    if (now >= half) {
        const Slot es = p.time_to_slot(now - half);
        if (p.slot_time(es) + half == now && es.period > 0) act_as_endorser(es, now, out);
    }
    return out;
}

}  // namespace nasdag
