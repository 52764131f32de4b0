#pragma once

#include <array>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <queue>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "nasdag/adversary.hpp"
#include "nasdag/node.hpp"
#include "nasdag/scenario.hpp"

namespace nasdag {

struct NodeReport {
    NodeId id = 0;
    bool honest = true;
    Address address{};
    std::uint64_t final_blocks = 0;
    std::uint64_t settled_period = 0;
    Digest prefix_digest{};
    Digest ledger_digest{};
    Coins supply = 0;
    std::uint64_t verifications = 0;
    std::uint64_t block_denunciations = 0;
    std::uint64_t endorsement_denunciations = 0;
    NodeMetrics metrics{};
};

struct AuditReport {
    std::uint64_t conflicting_finals = 0;
    std::uint64_t ancestor_violations = 0;
    std::uint64_t lemma1_slots = 0;
    std::uint64_t lemma1_violations = 0;
    std::uint64_t lemma1_max_certified = 0;
    std::uint64_t attacker_max_certified = 0;
    std::uint64_t lemma2_regime_slots = 0;
    std::uint64_t lemma2_violations = 0;
    std::uint64_t conservation_failures = 0;
    std::uint64_t rebroadcast_violations = 0;
    std::uint64_t common_settled = 0;
    std::uint64_t required_settled = 0;
    bool prefixes_identical = false;
    bool converged = false;

    bool safe() const {
        return conflicting_finals == 0 && ancestor_violations == 0 && lemma1_violations == 0 &&
               lemma2_violations == 0 && conservation_failures == 0 && rebroadcast_violations == 0;
    }
};

struct PeriodSample {
    std::uint64_t period = 0;
    double liveness = 0;
    std::uint64_t clique_count = 0;
    std::uint64_t messages = 0;
    std::uint64_t verifications = 0;
};

struct ScenarioReport {
    ScenarioConfig config;
    Coins adversary_stake = 0;
    std::uint64_t finalized_slots = 0;
    double liveness = 0;
    std::optional<double> analytic_liveness;
    std::vector<NodeReport> nodes;
    AuditReport audits;
    std::vector<PeriodSample> series;
    std::array<std::uint64_t, kMsgTags> messages_by_tag{};
    std::uint64_t messages = 0;
    std::uint64_t dropped = 0;
    std::uint64_t honest_verifications = 0;
    std::uint64_t max_clique_count = 0;
    std::uint64_t attack_slots = 0;
    std::uint64_t equivocations = 0;
    std::vector<std::pair<Address, Account>> ledger;  // reference node's final ledger

    std::string to_json() const;
    std::string timeseries_csv() const;
    std::string ledger_csv() const;
    Digest digest() const;
};

/// Called for every delivered message: (time, from, to, message).
using DeliveryObserver = std::function<void(TimeMs, NodeId, NodeId, const Message&)>;

/// Deterministic discrete-event run of one scenario. Honest nodes have ids
/// [0, honest_nodes); the adversary, if any, comes last.
class Simulation {
public:
    explicit Simulation(ScenarioConfig cfg);
    ~Simulation();
    Simulation(const Simulation&) = delete;
    Simulation& operator=(const Simulation&) = delete;

    /// Processes every event strictly before t.
    void run_until(TimeMs t);
    void run();
    TimeMs end_time() const { return static_cast<TimeMs>(cfg_.periods + 1) * cfg_.params.t0; }
    TimeMs now() const { return now_; }

    ScenarioReport report();

    const ScenarioConfig& config() const { return cfg_; }
    const ProtocolParams& params() const { return cfg_.params; }
    std::size_t honest_count() const { return honest_.size(); }
    Node& honest(NodeId id) { return *honest_.at(id); }
    Adversary* adversary() { return adversary_; }
    const Committee& committee() const { return *committee_; }
    std::optional<Address> adversary_address() const;
    TimeMs skew(NodeId id) const { return skew_.at(id); }
    void set_observer(DeliveryObserver obs) { observer_ = std::move(obs); }
    /// Queues a transaction with every honest node.
    void submit_transaction(const Transaction& tx);

private:
    struct Event {
        TimeMs time = 0;
        std::uint64_t seq = 0;
        NodeId to = 0;
        NodeId from = 0;
        bool tick = false;
        Message msg;
    };
    struct Later {
        bool operator()(const Event& a, const Event& b) const {
            return a.time != b.time ? a.time > b.time : a.seq > b.seq;
        }
    };
    struct SlotPool {
        std::map<BlockId, std::set<std::uint32_t>> support;
        std::set<std::pair<std::uint32_t, BlockId>> seen;
    };

    bool partitioned(NodeId a, NodeId b, TimeMs t) const;
    bool is_adversary(NodeId id) const { return adversary_ != nullptr && id == adversary_id_; }
    void dispatch(NodeId from, Outbox out, TimeMs t);
    void observe(const Message& m);
    void check_certificate(const Certificate& c);
    void flush_pool(std::uint64_t before_period);
    std::uint32_t attacker_indices(const Slot& s) const;
    void sample_period(std::uint64_t period);
    void inject_workload(std::uint64_t period);

    ScenarioConfig cfg_;
    KeyRegistry registry_;
    std::shared_ptr<Committee> committee_;
    std::vector<std::unique_ptr<Participant>> participants_;
    std::vector<Node*> honest_;
    Adversary* adversary_ = nullptr;
    NodeId adversary_id_ = 0;
    std::vector<TimeMs> skew_;
    std::vector<Signer> users_;
    std::vector<std::uint64_t> user_nonce_;
    Coins genesis_supply_ = 0;
    Coins adversary_stake_ = 0;

    std::priority_queue<Event, std::vector<Event>, Later> queue_;
    std::uint64_t seq_ = 0;
    TimeMs now_ = 0;
    TimeMs tick_step_ = 0;
    std::mt19937_64 rng_;
    DeliveryObserver observer_;

    std::map<Slot, SlotPool> pool_;
    std::set<BlockId> seen_blocks_;
    AuditReport audits_;
    std::array<std::uint64_t, kMsgTags> by_tag_{};
    std::uint64_t messages_ = 0;
    std::uint64_t dropped_ = 0;
    std::uint64_t period_messages_ = 0;
    std::uint64_t last_verifications_ = 0;
    std::uint64_t next_period_ = 1;
    std::uint64_t max_cliques_ = 0;
    std::vector<PeriodSample> series_;
};

ScenarioReport run_scenario(const ScenarioConfig& cfg);

/// True iff honest finalized prefixes agree and reach past the last
/// partition (and adversary stop) by the end of the run.
bool partition_heal_check(const ScenarioReport& report);

}  // namespace nasdag
