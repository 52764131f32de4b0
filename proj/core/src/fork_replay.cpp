#include "nasdag/fork_replay.hpp"

#include <algorithm>
#include <sstream>

namespace nasdag {

namespace {

std::string short_id(const BlockId& id) { return id.hex().substr(0, 8); }

ScenarioConfig fixture(const ForkReplayOptions& o, std::uint64_t seed) {
    ScenarioConfig cfg;
    cfg.name = "fork_replay";
    cfg.seed = seed;
    cfg.params.threads = 1;
    cfg.params.endorsers = o.endorsers;
    cfg.params.threshold = o.threshold;
    cfg.params.delta_f = o.delta_f;
    cfg.params.clock_skew = 0;
    cfg.honest_nodes = o.honest_nodes;
    cfg.beta = o.beta;
    cfg.adversary.strategy = Strategy::fork_attacker;
    cfg.adversary.depth = 1;
    cfg.workload.tx_per_period = 0;
    cfg.eval_margin = 0;
    return cfg;
}

struct Schedule {
    std::uint64_t seed = 0;
    std::uint64_t attack = 0;
};

std::optional<Schedule> find_schedule(const ForkReplayOptions& o) {
    constexpr std::uint64_t kSeeds = 256;
    constexpr std::uint64_t kPeriods = 256;
    for (std::uint64_t seed = o.seed; seed < o.seed + kSeeds; ++seed) {
        auto cfg = fixture(o, seed);
        cfg.periods = 1;
        cfg.adversary.attack_from = cfg.adversary.attack_until = 0;
        Simulation probe(cfg);
        const auto adv = probe.adversary_address();
        if (!adv) return std::nullopt;
        const auto& c = probe.committee();
        auto honest_slot = [&](std::uint64_t p) { return c.producer(Slot{0, p}) != *adv; };
        auto honest_quorum = [&](std::uint64_t p) {
            return o.endorsers - c.indices_of(Slot{0, p}, *adv).size() >= o.threshold;
        };
        for (std::uint64_t p = 3; p < kPeriods; ++p) {
            if (c.producer(Slot{0, p}) != *adv) continue;
            if (!honest_slot(p - 2) || !honest_slot(p - 1) || !honest_slot(p + 1)) continue;
            if (!honest_quorum(p - 2) || !honest_quorum(p - 1) || !honest_quorum(p)) continue;
            return Schedule{seed, p};
        }
    }
    return std::nullopt;
}

std::string describe(const Message& m) {
    std::ostringstream os;
    os << to_string(m.tag);
    switch (m.tag) {
        case MsgTag::block: {
            const auto& b = *m.block;
            os << ' ' << short_id(b.id) << " slot " << b.slot.str();
            if (!b.parents.empty()) os << " parent " << short_id(b.thread_parent().id);
            for (const auto& c : b.certificates) os << " cert" << c.slot.str() << "->" << short_id(c.endorsed);
            break;
        }
        case MsgTag::endorsement: {
            std::map<std::pair<Slot, BlockId>, std::size_t> groups;
            for (const auto& e : *m.endorsements) ++groups[{e.slot, e.endorsed}];
            for (const auto& [k, n] : groups) os << ' ' << n << "x" << k.first.str() << "->" << short_id(k.second);
            break;
        }
        case MsgTag::certificate:
            os << ' ' << m.certificate->slot.str() << "->" << short_id(m.certificate->endorsed);
            break;
        case MsgTag::request_block: os << ' ' << short_id(m.requested); break;
    }
    return os.str();
}

/// Largest fitness over cliques containing the block, or -1.
std::int64_t best_fitness_with(const CliqueReport& rep, const BlockId& id) {
    auto v = rep.index_of(id);
    if (!v) return -1;
    std::int64_t best = -1;
    for (std::size_t c = 0; c < rep.cliques.size(); ++c)
        if (rep.cliques[c].test(*v)) best = std::max<std::int64_t>(best, static_cast<std::int64_t>(rep.clique_fitness[c]));
    return best;
}

}  // namespace

bool ForkReplayResult::outcome_ok() const {
    return attack_parent_is_prev && attack_includes_prev_cert && branches_incompatible &&
           (speculative_cert_present || honest_final_early) &&
           (attack_in_compat ? fitness_lift == 1 : !attack_rejection.empty()) &&
           (blockclique_has_honest || honest_final_early) && !blockclique_has_attack && honest_endorsers_chose_honest &&
           !attack_certified && successor_extends_honest && attack_stale_everywhere && !attack_ever_final &&
           honest_final_everywhere;
}

std::optional<double> ForkReplayResult::periods_to_final() const {
    if (!second_cert_time || !honest_final_time) return std::nullopt;
    return static_cast<double>(*honest_final_time - *second_cert_time) / static_cast<double>(t0);
}

std::string ForkReplayResult::trace() const {
    std::ostringstream os;
    os << "fork replay seed=" << seed << " i=" << honest_period << " attack=" << attack_period << '\n';
    os << "b_{i-1}=" << short_id(prev) << " b_i=" << short_id(honest) << " b_{i+1}=" << short_id(attack);
    if (successor) os << " b_{i+2}=" << short_id(*successor);
    os << '\n';
    for (const auto& f : frames) {
        os << "== frame " << f.number << " t=" << f.time << '\n';
        for (const auto& l : f.lines) os << "  " << l << '\n';
    }
    os << "== events at node 0\n";
    for (const auto& e : events) os << "  " << e << '\n';
    os << "== outcome " << (outcome_ok() ? "honest branch wins" : "UNEXPECTED") << '\n';
    return os.str();
}

ForkReplayResult replay_fork_attack(const ForkReplayOptions& opts) {
    ForkReplayResult r;
    const auto sched = find_schedule(opts);
    if (!sched) throw std::runtime_error("fork replay: no schedule with an attacker slot found");
    auto cfg = fixture(opts, sched->seed);
    const std::uint64_t p = sched->attack;
    cfg.periods = p + opts.tail_periods;
    cfg.adversary.attack_from = p;
    cfg.adversary.attack_until = p + 1;

    Simulation sim(cfg);
    const auto& params = sim.params();
    const TimeMs t0 = params.t0;
    const TimeMs bound = cfg.network.bound(t0);
    r.seed = sched->seed;
    r.honest_period = p - 1;
    r.attack_period = p;
    r.t0 = t0;
    const Slot si{0, p - 1}, sa{0, p}, sn{0, p + 1};
    const TimeMs window_from = params.slot_time(si);
    const TimeMs window_to = params.slot_time(sn) + t0;

    sim.set_observer([&](TimeMs t, NodeId from, NodeId to, const Message& m) {
        if (to != 0 || t < window_from || t >= window_to) return;
        std::ostringstream os;
        os << "t=" << t << " from=" << from << ' ' << describe(m);
        r.events.push_back(os.str());
    });

    Node& ref = sim.honest(0);
    auto block_at = [&](const Slot& s) -> std::optional<BlockId> {
        if (auto f = ref.graph().final_at(s)) return f;
        auto it = ref.graph().active_by_slot().find(s);
        if (it == ref.graph().active_by_slot().end() || it->second.empty()) return std::nullopt;
        return it->second.front();
    };

    // Frame 1: b_i carries cert_{i-1} and has gathered its own certificate.
    sim.run_until(params.slot_time(sa));
    ForkFrame f1{1, params.slot_time(sa), {}};
    const auto bi = block_at(si);
    const auto bprev = block_at(Slot{0, p - 2});
    if (!bi || !bprev) throw std::runtime_error("fork replay: honest chain missing before the attack");
    r.honest = *bi;
    r.prev = *bprev;
    const auto bi_body = ref.graph().body(r.honest);
    const bool carries_prev = std::any_of(bi_body->certificates.begin(), bi_body->certificates.end(),
                                          [&](const Certificate& c) { return c.endorsed == r.prev; });
    r.speculative_cert_present = ref.compat().has_certificate(CertKey{si, r.honest});
    r.honest_final_early = ref.graph().is_final(r.honest);
    if (r.honest_final_early) r.honest_final_time = params.slot_time(sa);
    f1.lines.push_back("b_i " + short_id(r.honest) + " thread parent " + short_id(bi_body->thread_parent().id) +
                       (carries_prev ? " includes cert_{i-1}" : " lacks cert_{i-1}"));
    if (r.honest_final_early)
        f1.lines.push_back("b_i already final with cert_i");
    else
        f1.lines.push_back(std::string("cert_i for b_i ") + (r.speculative_cert_present ? "formed" : "missing") +
                           (ref.compat().is_speculative_only(CertKey{si, r.honest}) ? " (speculative)" : ""));
    r.frames.push_back(std::move(f1));

    // Frame 2: the attack block forks from b_{i-1}.
    const TimeMs frame2_time = params.slot_time(sa) + bound + 1;
    const auto rejections_before = ref.metrics().rejections;
    sim.run_until(frame2_time);
    ForkFrame f2{2, frame2_time, {}};
    BlockPtr attack_body;
    if (auto adv = sim.adversary(); adv != nullptr) {
        auto it = adv->produced().find(sa);
        if (it != adv->produced().end() && !it->second.empty()) attack_body = it->second.front();
    }
    if (!attack_body) throw std::runtime_error("fork replay: attacker produced no block");
    r.attack = attack_body->id;
    for (const auto& [reason, n] : ref.metrics().rejections) {
        auto before = rejections_before.find(reason);
        if (before == rejections_before.end() || before->second < n) r.attack_rejection = to_string(reason);
    }
    r.attack_in_compat = ref.compat().has_block(r.attack);
    r.attack_parent_is_prev = attack_body->thread_parent().id == r.prev;
    r.attack_includes_prev_cert = std::any_of(attack_body->certificates.begin(), attack_body->certificates.end(),
                                              [&](const Certificate& c) { return c.endorsed == r.prev; });
    r.branches_incompatible =
        r.attack_in_compat ? !ref.compat().adjacent(r.honest, r.attack) : !r.attack_rejection.empty();
    f2.lines.push_back("b_{i+1} " + short_id(r.attack) + " thread parent " +
                       short_id(attack_body->thread_parent().id) +
                       (r.attack_includes_prev_cert ? " includes cert_{i-1}" : " lacks cert_{i-1}"));
    if (r.attack_in_compat)
        f2.lines.push_back(std::string("b_i and b_{i+1} ") + (r.branches_incompatible ? "incompatible" : "compatible"));
    else
        f2.lines.push_back("b_{i+1} rejected on arrival: " + (r.attack_rejection.empty() ? "no reason" : r.attack_rejection));

    // Frame 3: cert_i tips the fitness, the blockclique keeps b_i.
    const auto& rep = ref.clique_report();
    r.honest_fitness = best_fitness_with(rep, r.honest);
    r.attack_fitness = best_fitness_with(rep, r.attack);
    r.fitness_lift = r.honest_fitness - r.attack_fitness;
    r.blockclique_has_honest = rep.in_blockclique(r.honest);
    r.blockclique_has_attack = rep.in_blockclique(r.attack);
    f2.lines.push_back("cliques " + std::to_string(rep.cliques.size()));
    r.frames.push_back(std::move(f2));
    ForkFrame f3{3, frame2_time, {}};
    if (r.attack_in_compat)
        f3.lines.push_back("fitness honest branch " + std::to_string(r.honest_fitness) + ", attack branch " +
                           std::to_string(r.attack_fitness) + ", lift " + std::to_string(r.fitness_lift));
    else
        f3.lines.push_back("fitness honest branch " + std::to_string(r.honest_fitness) + ", attack branch absent");
    f3.lines.push_back(std::string("blockclique ") +
                       (r.blockclique_has_honest ? "contains b_i" : r.honest_final_early ? "past b_i (final)" : "lacks b_i") +
                       (r.blockclique_has_attack ? " and b_{i+1}" : ", excludes b_{i+1}"));

    const TimeMs step = 50;
    const TimeMs end = sim.end_time();
    std::size_t endorse_honest = 0;
    for (TimeMs t = frame2_time + step; t <= end; t += step) {
        sim.run_until(t);
        for (const auto& [key, c] : ref.certificates()) {
            if (key.slot != sa) continue;
            if (key.endorsed == r.honest) {
                endorse_honest = std::max(endorse_honest, c.endorsements.size());
                if (!r.second_cert_time) r.second_cert_time = t;
            }
            if (key.endorsed == r.attack) r.attack_certified = true;
        }
        if (!r.second_cert_time && ref.compat().has_certificate(CertKey{sa, r.honest})) r.second_cert_time = t;
        if (!r.honest_final_time && ref.graph().is_final(r.honest)) r.honest_final_time = t;
        if (!r.attack_stale_time && ref.is_stale(r.attack)) r.attack_stale_time = t;
        for (std::size_t n = 0; n < sim.honest_count(); ++n)
            if (sim.honest(static_cast<NodeId>(n)).graph().is_final(r.attack)) r.attack_ever_final = true;
    }
    sim.run();

    r.honest_endorsers_chose_honest = endorse_honest >= cfg.params.threshold;
    f3.lines.push_back("second cert for b_i at slot " + sa.str() + ": " +
                       (r.honest_endorsers_chose_honest ? std::to_string(endorse_honest) + " endorsements" : "none"));
    f3.lines.push_back(std::string("b_{i+1} ") + (r.attack_certified ? "certified" : "never certified"));

    r.successor = block_at(sn);
    if (!r.successor) {
        // b_{i+2} may already be final and indexed only by slot.
        r.successor = ref.graph().final_at(sn);
    }
    if (r.successor) {
        const auto* parents = ref.graph().parents_of(*r.successor);
        r.successor_extends_honest = parents != nullptr && (*parents)[0].id == r.honest;
        if (auto body = ref.graph().body(*r.successor))
            r.successor_certs_for_honest = static_cast<std::size_t>(
                std::count_if(body->certificates.begin(), body->certificates.end(),
                              [&](const Certificate& c) { return c.endorsed == r.honest; }));
        f3.lines.push_back("b_{i+2} " + short_id(*r.successor) + (r.successor_extends_honest ? " extends b_i" : " skips b_i") +
                           " with " + std::to_string(r.successor_certs_for_honest) + " certs for b_i");
    } else {
        f3.lines.push_back("b_{i+2} missing");
    }

    r.attack_stale_everywhere = true;
    r.honest_final_everywhere = true;
    for (std::size_t n = 0; n < sim.honest_count(); ++n) {
        const Node& node = sim.honest(static_cast<NodeId>(n));
        if (node.graph().is_final(r.attack)) r.attack_ever_final = true;
        if (!node.is_stale(r.attack) && node.graph().contains(r.attack)) r.attack_stale_everywhere = false;
        if (!node.graph().is_final(r.honest)) r.honest_final_everywhere = false;
    }
    f3.lines.push_back(std::string("b_{i+1} ") + (r.attack_stale_everywhere ? "stale" : "still live") +
                       " at every honest node, " + (r.attack_ever_final ? "finalized somewhere" : "never finalized"));
    f3.lines.push_back(std::string("b_i ") + (r.honest_final_everywhere ? "final" : "not final") +
                       " at every honest node");
    r.frames.push_back(std::move(f3));
    return r;
}

}  // namespace nasdag
