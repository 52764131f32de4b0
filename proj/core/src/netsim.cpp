#include "nasdag/netsim.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "nasdag/analysis.hpp"

namespace nasdag {

namespace {

Signer signer_in_thread(const Digest& master, std::string_view name, std::uint32_t thread,
                        std::uint32_t threads, std::uint64_t& counter) {
    while (true) {
        Signer s(derive_secret(master, name, counter++));
        if (shard_of(s.address(), threads) == thread) return s;
    }
}

}  // namespace

Simulation::Simulation(ScenarioConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.validate();
    auto& p = cfg_.params;
    p.seed = sha256("nasdag-scenario-seed:" + std::to_string(cfg_.seed));
    rng_.seed(cfg_.seed ^ 0x9e3779b97f4a7c15ULL);
    const Digest master = p.seed;

    std::map<Address, Coins> stakes;
    std::vector<Signer> honest_signers;
    for (std::uint32_t i = 0; i < cfg_.honest_nodes; ++i) {
        const auto secret = derive_secret(master, "honest", i);
        registry_.add(secret);
        honest_signers.emplace_back(secret);
        stakes[honest_signers.back().address()] += cfg_.honest_stake;
    }
    adversary_stake_ = cfg_.adversary_stake();
    std::optional<Signer> adv_signer;
    if (adversary_stake_ > 0) {
        const auto secret = derive_secret(master, "adversary", 0);
        registry_.add(secret);
        adv_signer.emplace(secret);
        stakes[adv_signer->address()] += adversary_stake_;
    }
    committee_ = std::make_shared<Committee>(std::make_shared<const StakeTable>(stakes, 0), p.seed, p.endorsers);

    Ledger genesis(p.economics);
    for (const auto& [addr, stake] : stakes) genesis.fund(addr, 0, p.economics.deposit);
    std::uint64_t counter = 0;
    for (std::uint32_t t = 0; t < p.threads; ++t) {
        for (std::uint32_t u = 0; u < cfg_.workload.users_per_thread; ++u) {
            users_.push_back(signer_in_thread(master, "user", t, p.threads, counter));
            registry_.add(derive_secret(master, "user", counter - 1));
            genesis.fund(users_.back().address(), cfg_.workload.user_balance, 0);
        }
    }
    user_nonce_.assign(users_.size(), 0);
    genesis_supply_ = genesis.total_supply();

    for (std::uint32_t i = 0; i < cfg_.honest_nodes; ++i) {
        auto node = std::make_unique<Node>(i, p, committee_, registry_, honest_signers[i], genesis);
        honest_.push_back(node.get());
        participants_.push_back(std::move(node));
    }
    if (adv_signer) {
        adversary_id_ = cfg_.honest_nodes;
        std::vector<Signer> ground;
        std::uint64_t gcount = 0;
        for (std::uint32_t t = 0; t < p.threads; ++t) {
            ground.push_back(signer_in_thread(master, "ground", t, p.threads, gcount));
            registry_.add(derive_secret(master, "ground", gcount - 1));
        }
        std::vector<NodeId> peers(cfg_.honest_nodes);
        std::iota(peers.begin(), peers.end(), 0);
        auto view = std::make_unique<Node>(adversary_id_, p, committee_, registry_, *adv_signer, genesis);
        auto adv = std::make_unique<Adversary>(std::move(view), cfg_.adversary, std::move(ground), std::move(peers));
        adversary_ = adv.get();
        participants_.push_back(std::move(adv));
    }

    for (std::size_t i = 0; i < participants_.size(); ++i) {
        const bool adv = adversary_ != nullptr && i == adversary_id_;
        const TimeMs sigma = p.clock_skew;
        skew_.push_back(adv || sigma == 0 ? 0 : static_cast<TimeMs>(rng_() % static_cast<std::uint64_t>(sigma + 1)) - sigma / 2);
    }
    tick_step_ = std::gcd(p.t0 / p.threads, p.t0 / 2);
    for (std::size_t i = 0; i < participants_.size(); ++i) {
        Event ev;
        ev.time = tick_step_ - skew_[i];
        ev.seq = seq_++;
        ev.to = ev.from = static_cast<NodeId>(i);
        ev.tick = true;
        queue_.push(std::move(ev));
    }
}

Simulation::~Simulation() = default;

std::optional<Address> Simulation::adversary_address() const {
    if (!adversary_) return std::nullopt;
    return adversary_->address();
}

void Simulation::submit_transaction(const Transaction& tx) {
    for (auto* n : honest_) n->submit_transaction(tx);
}

bool Simulation::partitioned(NodeId a, NodeId b, TimeMs t) const {
    if (is_adversary(a) || is_adversary(b) || t < 0) return false;
    const auto period = static_cast<std::uint64_t>(t / cfg_.params.t0);
    for (const auto& part : cfg_.partitions) {
        if (period < part.from || period >= part.until) continue;
        const bool sa = std::find(part.side.begin(), part.side.end(), a) != part.side.end();
        const bool sb = std::find(part.side.begin(), part.side.end(), b) != part.side.end();
        if (sa != sb) return true;
    }
    return false;
}

std::uint32_t Simulation::attacker_indices(const Slot& s) const {
    if (!adversary_) return 0;
    return static_cast<std::uint32_t>(committee_->indices_of(s, adversary_->address()).size());
}

void Simulation::check_certificate(const Certificate& c) {
    const auto& p = cfg_.params;
    if (c.slot.thread >= p.threads || c.endorsements.size() < p.threshold) return;
    std::set<std::uint32_t> idx;
    for (const auto& e : c.endorsements) {
        if (e.index >= p.endorsers || e.slot != c.slot || e.endorsed != c.endorsed) return;
        if (committee_->endorser(e.slot, e.index) != e.endorser) return;
        idx.insert(e.index);
    }
    if (idx.size() < p.threshold || !adversary_) return;
    if (attacker_indices(c.slot) >= p.threshold) return;
    const auto& adv = adversary_->address();
    const bool honest_member = std::any_of(c.endorsements.begin(), c.endorsements.end(),
                                           [&](const Endorsement& e) { return e.endorser != adv; });
    if (!honest_member) ++audits_.lemma2_violations;
}

void Simulation::observe(const Message& m) {
    const auto& p = cfg_.params;
    switch (m.tag) {
        case MsgTag::endorsement:
            for (const auto& e : *m.endorsements) {
                if (e.slot.thread >= p.threads || e.index >= p.endorsers) continue;
                auto& sp = pool_[e.slot];
                if (!sp.seen.emplace(e.index, e.endorsed).second) continue;
                if (committee_->endorser(e.slot, e.index) != e.endorser) continue;
                if (e.sig.signer != e.endorser || e.sig.payload != e.payload || !registry_.verify(e.sig)) continue;
                sp.support[e.endorsed].insert(e.index);
            }
            break;
        case MsgTag::certificate: check_certificate(*m.certificate); break;
        case MsgTag::block:
            if (seen_blocks_.insert(m.block->id).second)
                for (const auto& c : m.block->certificates) check_certificate(c);
            break;
        case MsgTag::request_block: break;
    }
}

void Simulation::flush_pool(std::uint64_t before_period) {
    const auto& p = cfg_.params;
    const auto end = pool_.lower_bound(Slot{0, before_period});
    for (auto it = pool_.begin(); it != end; ++it) {
        const Slot& s = it->first;
        const auto a = static_cast<std::int64_t>(attacker_indices(s));
        const std::int64_t n = static_cast<std::int64_t>(p.endorsers) - a;
        const std::int64_t k = static_cast<std::int64_t>(p.threshold) - a;
        std::uint64_t certified = 0, attacker_certified = 0;
        const std::vector<BlockPtr>* produced = nullptr;
        if (adversary_) {
            auto pr = adversary_->produced().find(s);
            if (pr != adversary_->produced().end()) produced = &pr->second;
        }
        for (const auto& [id, idx] : it->second.support) {
            if (idx.size() < p.threshold) continue;
            ++certified;
            if (produced && std::any_of(produced->begin(), produced->end(),
                                        [&](const BlockPtr& b) { return b->id == id; }))
                ++attacker_certified;
        }
        audits_.lemma1_max_certified = std::max(audits_.lemma1_max_certified, certified);
        audits_.attacker_max_certified = std::max(audits_.attacker_max_certified, attacker_certified);
        if (k >= 1) {
            ++audits_.lemma1_slots;
            if (static_cast<std::int64_t>(certified) > analysis::lemma1_bound(n, k)) ++audits_.lemma1_violations;
        } else {
            ++audits_.lemma2_regime_slots;
        }
    }
    pool_.erase(pool_.begin(), end);
}

void Simulation::inject_workload(std::uint64_t) {
    if (users_.empty()) return;
    for (std::uint32_t k = 0; k < cfg_.workload.tx_per_period; ++k) {
        const auto u = static_cast<std::size_t>(rng_() % users_.size());
        const auto r = static_cast<std::size_t>(rng_() % users_.size());
        const Coins amount = 1 + rng_() % 1000;
        const Coins fee = 1 + rng_() % 10;
        submit_transaction(Transaction::make(users_[u], users_[r].address(), amount, fee, user_nonce_[u]++));
    }
}

void Simulation::sample_period(std::uint64_t period) {
    auto& ref = *honest_.front();
    std::uint64_t finals = 0;
    const auto& fb = ref.graph().final_by_slot();
    for (auto it = fb.lower_bound(Slot{0, 1}); it != fb.end() && it->first.period <= period; ++it) ++finals;
    std::uint64_t verif = 0;
    for (auto* n : honest_) verif += n->verifications();
    PeriodSample s;
    s.period = period;
    s.liveness = static_cast<double>(finals) / static_cast<double>(cfg_.params.threads * period);
    s.clique_count = ref.clique_report().cliques.size();
    s.messages = period_messages_;
    s.verifications = verif - last_verifications_;
    last_verifications_ = verif;
    period_messages_ = 0;
    max_cliques_ = std::max(max_cliques_, s.clique_count);
    series_.push_back(s);
}

void Simulation::dispatch(NodeId from, Outbox out, TimeMs t) {
    const auto& net = cfg_.network;
    const TimeMs bound = net.bound(cfg_.params.t0);
    for (auto& env : out) {
        observe(env.msg);
        auto deliver = [&](NodeId to) {
            if (to == from || to >= participants_.size()) return;
            if (partitioned(from, to, t)) {
                ++dropped_;
                return;
            }
            TimeMs delay = 0;
            if (!is_adversary(from) && !is_adversary(to)) {
                delay = net.base_delay + static_cast<TimeMs>(rng_() % static_cast<std::uint64_t>(net.jitter + 1));
                delay = std::min(delay, bound);
            }
            Event ev;
            ev.time = t + delay;
            ev.seq = seq_++;
            ev.to = to;
            ev.from = from;
            ev.msg = env.msg;
            queue_.push(std::move(ev));
        };
        if (env.to) {
            deliver(*env.to);
        } else {
            for (NodeId to = 0; to < participants_.size(); ++to) deliver(to);
        }
    }
}

void Simulation::run_until(TimeMs t) {
    const TimeMs t0 = cfg_.params.t0;
    while (!queue_.empty() && queue_.top().time < t) {
        Event ev = queue_.top();
        queue_.pop();
        now_ = ev.time;
        while (next_period_ <= cfg_.periods && now_ >= static_cast<TimeMs>(next_period_) * t0) {
            if (next_period_ > 1) sample_period(next_period_ - 1);
            inject_workload(next_period_);
            if (next_period_ > 4) flush_pool(next_period_ - 4);
            if (next_period_ > 64) committee_->prune_before(next_period_ - 64);
            ++next_period_;
        }
        auto& part = *participants_[ev.to];
        const TimeMs local = ev.time + skew_[ev.to];
        if (ev.tick) {
            Event next;
            next.time = ev.time + tick_step_;
            next.seq = seq_++;
            next.to = next.from = ev.to;
            next.tick = true;
            if (next.time < end_time()) queue_.push(std::move(next));
            dispatch(ev.to, part.on_tick(local), ev.time);
        } else {
            ++messages_;
            ++period_messages_;
            ++by_tag_[static_cast<std::size_t>(ev.msg.tag)];
            if (observer_) observer_(ev.time, ev.from, ev.to, ev.msg);
            dispatch(ev.to, part.on_message(ev.from, ev.msg, local), ev.time);
        }
    }
    if (now_ < t && queue_.empty()) now_ = t;
}

void Simulation::run() { run_until(end_time()); }

ScenarioReport Simulation::report() {
    const auto& p = cfg_.params;
    while (next_period_ <= cfg_.periods + 1) {
        if (next_period_ > 1) sample_period(next_period_ - 1);
        ++next_period_;
    }
    flush_pool(UINT64_MAX);

    ScenarioReport r;
    r.config = cfg_;
    r.adversary_stake = adversary_stake_;
    r.series = series_;
    r.messages_by_tag = by_tag_;
    r.messages = messages_;
    r.dropped = dropped_;
    r.max_clique_count = max_cliques_;

    auto& ref = *honest_.front();
    const std::uint64_t eval = cfg_.eval_periods();
    const auto& fb = ref.graph().final_by_slot();
    for (auto it = fb.lower_bound(Slot{0, 1}); it != fb.end() && it->first.period <= eval; ++it) ++r.finalized_slots;
    r.liveness = static_cast<double>(r.finalized_slots) / static_cast<double>(p.threads * eval);
    if (adversary_ && cfg_.adversary.strategy == Strategy::withholder)
        r.analytic_liveness = analysis::to_double(
            analysis::liveness_parameter(p.endorsers, p.threshold, analysis::parse_rational(cfg_.beta)));

    AuditReport a = audits_;
    std::uint64_t common = UINT64_MAX;
    for (auto* n : honest_) common = std::min(common, n->settled_period());
    a.common_settled = common;
    std::map<Slot, BlockId> union_finals;
    std::set<Digest> prefixes;
    for (auto* n : honest_) {
        const auto& m = n->metrics();
        a.conservation_failures += m.conservation_failures;
        a.rebroadcast_violations += m.rebroadcast_violations;
        if (genesis_supply_ + m.minted - m.burned != n->ledger().total_supply()) ++a.conservation_failures;
        for (const auto& [slot, id] : n->graph().final_by_slot()) {
            auto [it, inserted] = union_finals.emplace(slot, id);
            if (!inserted && it->second != id) ++a.conflicting_finals;
            if (slot.period == 0) continue;
            for (const auto& par : *n->graph().parents_of(id))
                if (!n->graph().is_final(par.id)) ++a.ancestor_violations;
        }
        prefixes.insert(n->final_prefix_digest(common));
    }
    // The union of finalized blocks must form one chain per thread.
    for (auto it = union_finals.begin(); it != union_finals.end(); ++it) {
        if (it->first.period == 0) continue;
        const std::vector<ParentRef>* parents = nullptr;
        for (auto* n : honest_)
            if ((parents = n->graph().parents_of(it->second)) != nullptr) break;
        if (parents == nullptr || parents->size() <= it->first.thread) continue;
        auto prev = std::find_if(std::make_reverse_iterator(it), union_finals.rend(),
                                 [&](const auto& kv) { return kv.first.thread == it->first.thread; });
        if (prev != union_finals.rend() && (*parents)[it->first.thread].id != prev->second) ++a.conflicting_finals;
    }
    a.prefixes_identical = prefixes.size() == 1;
    std::uint64_t disturbance = 0;
    for (const auto& part : cfg_.partitions) disturbance = std::max(disturbance, part.until);
    if (adversary_ && cfg_.adversary.strategy != Strategy::honest && cfg_.adversary.attack_until <= cfg_.periods)
        disturbance = std::max(disturbance, cfg_.adversary.attack_until);
    a.required_settled = disturbance + 1;
    a.converged = a.prefixes_identical && common >= a.required_settled;

    for (std::size_t i = 0; i < participants_.size(); ++i) {
        const bool adv = adversary_ != nullptr && i == adversary_id_;
        const Node& n = adv ? adversary_->view() : *honest_[i];
        NodeReport nr;
        nr.id = static_cast<NodeId>(i);
        nr.honest = !adv;
        nr.address = n.address();
        nr.final_blocks = n.graph().final_count();
        nr.settled_period = n.settled_period();
        nr.prefix_digest = n.final_prefix_digest(common);
        nr.ledger_digest = n.ledger().state_digest();
        nr.supply = n.ledger().total_supply();
        nr.verifications = n.verifications();
        nr.block_denunciations = n.block_denunciations().size();
        nr.endorsement_denunciations = n.endorsement_denunciations().size();
        nr.metrics = n.metrics();
        if (!adv) r.honest_verifications += nr.verifications;
        r.nodes.push_back(std::move(nr));
    }
    if (adversary_) {
        for (const auto& [slot, blocks] : adversary_->produced())
            if (cfg_.adversary.attacking(slot.period)) ++r.attack_slots;
        r.equivocations = adversary_->equivocations();
    }
    for (const auto& [addr, acc] : ref.ledger().accounts()) r.ledger.emplace_back(addr, acc);
    r.audits = a;
    return r;
}

std::string ScenarioReport::to_json() const {
    using nlohmann::ordered_json;
    const auto& p = config.params;
    ordered_json j;
    j["scenario"] = config.name;
    j["seed"] = config.seed;
    j["periods"] = config.periods;
    j["eval_periods"] = config.eval_periods();
    j["protocol"] = {{"threads", p.threads},       {"t0_ms", p.t0},
                     {"endorsers", p.endorsers},   {"threshold", p.threshold},
                     {"delta_f", p.delta_f},       {"max_block_bits", p.max_block_bits},
                     {"clock_skew_ms", p.clock_skew}, {"clique_cap", p.clique_cap}};
    j["adversary"] = {{"strategy", to_string(config.adversary.strategy)},
                      {"beta", config.beta},
                      {"stake", adversary_stake},
                      {"versions", config.adversary.versions},
                      {"depth", config.adversary.depth},
                      {"attack_from", config.adversary.attack_from},
                      {"attack_until", config.adversary.attack_until},
                      {"attack_slots", attack_slots},
                      {"equivocations", equivocations}};
    j["liveness"] = liveness;
    j["finalized_slots"] = finalized_slots;
    if (analytic_liveness) j["analytic_liveness"] = *analytic_liveness;
    const auto& a = audits;
    j["audits"] = {{"conflicting_finals", a.conflicting_finals},
                   {"ancestor_violations", a.ancestor_violations},
                   {"lemma1_slots", a.lemma1_slots},
                   {"lemma1_violations", a.lemma1_violations},
                   {"lemma1_max_certified", a.lemma1_max_certified},
                   {"attacker_max_certified", a.attacker_max_certified},
                   {"lemma2_regime_slots", a.lemma2_regime_slots},
                   {"lemma2_violations", a.lemma2_violations},
                   {"conservation_failures", a.conservation_failures},
                   {"rebroadcast_violations", a.rebroadcast_violations},
                   {"common_settled", a.common_settled},
                   {"required_settled", a.required_settled},
                   {"prefixes_identical", a.prefixes_identical},
                   {"converged", a.converged},
                   {"safe", a.safe()}};
    ordered_json tags = ordered_json::object();
    for (std::size_t t = 0; t < kMsgTags; ++t) tags[to_string(static_cast<MsgTag>(t))] = messages_by_tag[t];
    j["network"] = {{"messages", messages},
                    {"dropped", dropped},
                    {"by_tag", tags},
                    {"honest_verifications", honest_verifications},
                    {"max_clique_count", max_clique_count}};
    ordered_json nodes = ordered_json::array();
    for (const auto& n : this->nodes) {
        const auto& m = n.metrics;
        ordered_json in = ordered_json::object(), out = ordered_json::object(), rej = ordered_json::object();
        for (std::size_t t = 0; t < kMsgTags; ++t) {
            in[to_string(static_cast<MsgTag>(t))] = m.in[t];
            out[to_string(static_cast<MsgTag>(t))] = m.out[t];
        }
        for (const auto& [reason, count] : m.rejections) rej[to_string(reason)] = count;
        nodes.push_back({{"id", n.id},
                         {"honest", n.honest},
                         {"address", n.address.hex()},
                         {"final_blocks", n.final_blocks},
                         {"settled_period", n.settled_period},
                         {"final_prefix_digest", n.prefix_digest.hex()},
                         {"ledger_digest", n.ledger_digest.hex()},
                         {"supply", n.supply},
                         {"verifications", n.verifications},
                         {"block_denunciations", n.block_denunciations},
                         {"endorsement_denunciations", n.endorsement_denunciations},
                         {"metrics",
                          {{"messages_in", in},
                           {"messages_out", out},
                           {"blocks_produced", m.blocks_produced},
                           {"produce_failures", m.produce_failures},
                           {"blocks_accepted", m.blocks_accepted},
                           {"blocks_deferred", m.blocks_deferred},
                           {"blocks_rejected", m.blocks_rejected},
                           {"blocks_conflicting", m.blocks_conflicting},
                           {"blocks_finalized", m.blocks_finalized},
                           {"blocks_stale", m.blocks_stale},
                           {"certs_formed", m.certs_formed},
                           {"certs_received", m.certs_received},
                           {"certs_rejected", m.certs_rejected},
                           {"endorsements_stored", m.endorsements_stored},
                           {"endorsements_rejected", m.endorsements_rejected},
                           {"requests_sent", m.requests_sent},
                           {"requests_answered", m.requests_answered},
                           {"blocks_executed", m.blocks_executed},
                           {"txs_applied", m.txs_applied},
                           {"txs_skipped", m.txs_skipped},
                           {"slashes", m.slashes},
                           {"blocks_expired", m.blocks_expired},
                           {"blocks_revived", m.blocks_revived},
                           {"minted", m.minted},
                           {"burned", m.burned},
                           {"rejections", rej}}}});
    }
    j["nodes"] = nodes;
    return j.dump(2) + "\n";
}

std::string ScenarioReport::timeseries_csv() const {
    std::ostringstream os;
    os << "period,liveness,cliqueCount,messages,verifications\n";
    os.precision(6);
    os << std::fixed;
    for (const auto& s : series)
        os << s.period << ',' << s.liveness << ',' << s.clique_count << ',' << s.messages << ',' << s.verifications
           << '\n';
    return os.str();
}

std::string ScenarioReport::ledger_csv() const {
    std::ostringstream os;
    os << "address,balance,deposit,next_nonce\n";
    for (const auto& [addr, acc] : ledger)
        os << addr.hex() << ',' << acc.balance << ',' << acc.deposit << ',' << acc.next_nonce << '\n';
    return os.str();
}

Digest ScenarioReport::digest() const {
    return sha256(to_json() + timeseries_csv() + ledger_csv());
}

ScenarioReport run_scenario(const ScenarioConfig& cfg) {
    Simulation sim(cfg);
    sim.run();
    return sim.report();
}

bool partition_heal_check(const ScenarioReport& report) { return report.audits.converged; }

}  // namespace nasdag
