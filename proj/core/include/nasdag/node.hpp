#pragma once

#include <array>
#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "nasdag/block_graph.hpp"
#include "nasdag/committee.hpp"
#include "nasdag/compat_graph.hpp"
#include "nasdag/ledger.hpp"
#include "nasdag/validity.hpp"

namespace nasdag {

using NodeId = std::uint32_t;

enum class MsgTag : std::uint8_t { block = 0, endorsement = 1, certificate = 2, request_block = 3 };
inline constexpr std::size_t kMsgTags = 4;
const char* to_string(MsgTag t);

/// A network message. Endorsements travel in batches from one sender.
struct Message {
    MsgTag tag = MsgTag::block;
    BlockPtr block;
    std::shared_ptr<const std::vector<Endorsement>> endorsements;
    std::shared_ptr<const Certificate> certificate;
    BlockId requested{};

    static Message of_block(BlockPtr b);
    static Message of_endorsements(std::vector<Endorsement> es);
    static Message of_certificate(Certificate c);
    static Message of_request(const BlockId& id);
};

struct Envelope {
    Message msg;
    std::optional<NodeId> to;  // none: broadcast to every peer
};

using Outbox = std::vector<Envelope>;

/// Anything the simulator can deliver messages and clock ticks to.
class Participant {
public:
    virtual ~Participant() = default;
    virtual Outbox on_message(NodeId from, const Message& m, TimeMs now) = 0;
    virtual Outbox on_tick(TimeMs now) = 0;
};

struct NodeMetrics {
    std::array<std::uint64_t, kMsgTags> in{};
    std::array<std::uint64_t, kMsgTags> out{};
    std::uint64_t blocks_produced = 0;
    std::uint64_t produce_failures = 0;
    std::uint64_t blocks_accepted = 0;
    std::uint64_t blocks_deferred = 0;
    std::uint64_t blocks_rejected = 0;
    std::uint64_t blocks_conflicting = 0;
    std::uint64_t blocks_finalized = 0;
    std::uint64_t blocks_stale = 0;
    std::uint64_t certs_formed = 0;
    std::uint64_t certs_received = 0;
    std::uint64_t certs_rejected = 0;
    std::uint64_t endorsements_stored = 0;
    std::uint64_t endorsements_rejected = 0;
    std::uint64_t requests_sent = 0;
    std::uint64_t requests_answered = 0;
    std::uint64_t blocks_executed = 0;
    std::uint64_t txs_applied = 0;
    std::uint64_t txs_skipped = 0;
    std::uint64_t slashes = 0;
    std::uint64_t minted = 0;
    std::uint64_t burned = 0;
    std::uint64_t conservation_failures = 0;
    std::uint64_t rebroadcast_violations = 0;
    std::uint64_t blocks_expired = 0;
    std::uint64_t blocks_revived = 0;
    std::map<Reason, std::uint64_t> rejections;
};

/// One validator: graphs, endorsement pools, first-in bookkeeping, request
/// list, ledger, and the producer and endorser instances.
class Node : public Participant {
public:
    Node(NodeId id, const ProtocolParams& params, std::shared_ptr<const Committee> committee,
         const KeyRegistry& registry, const Signer& signer, const Ledger& genesis);

    Outbox on_message(NodeId from, const Message& m, TimeMs now) override;
    Outbox on_tick(TimeMs now) override;

    Outbox handle_block(NodeId from, const BlockPtr& b, TimeMs now);
    Outbox handle_endorsements(const std::vector<Endorsement>& es, TimeMs now);
    Outbox handle_certificate(const Certificate& c, TimeMs now);
    Outbox handle_request_block(NodeId from, const BlockId& id);

    /// Builds (unsigned) the block this node would produce at s. A nonzero
    /// depth forces the thread parent that many certified steps further back.
    std::optional<Block> assemble_block(const Slot& s, std::uint32_t depth = 0);
    Outbox produce_block(const Slot& s, TimeMs now);

    /// Block an honest endorser of slot s votes for.
    BlockId endorsement_target(const Slot& s);
    /// Signs the not-yet-used own indices of s. Each index is used at most once.
    std::vector<Endorsement> choose_endorsements(const Slot& s);
    Outbox endorse_slot(const Slot& s, TimeMs now);

    void submit_transaction(const Transaction& tx);
    /// A passive node keeps its view up to date but never produces or endorses.
    void set_passive(bool passive) { passive_ = passive; }

    NodeId id() const { return id_; }
    const Address& address() const { return signer_.address(); }
    const Signer& signer() const { return signer_; }
    const ProtocolParams& params() const { return params_; }
    const Committee& committee() const { return *committee_; }
    const BlockGraph& graph() const { return g_; }
    const CompatGraph& compat() const { return gc_; }
    const Ledger& ledger() const { return ledger_; }
    const NodeMetrics& metrics() const { return metrics_; }
    std::uint64_t verifications() const { return verifier_.count(); }
    const CliqueReport& clique_report();
    bool is_stale(const BlockId& id) const { return stale_.count(id) != 0; }
    bool holds(const BlockId& id) const {
        return g_.contains(id) || deferred_.count(id) != 0 || expired_.count(id) != 0;
    }
    /// Discarded for missing its own-slot certificate; revived if one shows up.
    bool is_expired(const BlockId& id) const { return expired_.count(id) != 0; }
    BlockPtr held_body(const BlockId& id) const;

    const std::map<CertKey, Certificate>& certificates() const { return certs_; }
    const std::map<Slot, Denunciation>& block_denunciations() const { return block_denunciations_; }
    const std::map<std::pair<Slot, std::uint32_t>, Denunciation>& endorsement_denunciations() const {
        return endorsement_denunciations_;
    }
    bool requested(const BlockId& id) const { return requests_.count(id) != 0; }
    bool has_endorsed(const Slot& s, std::uint32_t index) const { return endorsed_.count({s, index}) != 0; }
    /// Lowest period every thread has finalized, i.e. the settled prefix.
    std::uint64_t settled_period() const;

    /// Digest over finalized slots and ids up to a period inclusive.
    Digest final_prefix_digest(std::uint64_t up_to_period) const;

private:
    struct Occupant {
        BlockId id{};
        Evidence evidence{};
    };

    ValidationContext context();
    ChainView view() const { return ChainView{g_, gc_, stale_}; }
    bool certified_at_own_slot(const BlockId& id, const Slot& slot) const;
    std::optional<ParentRef> pick_parent(std::uint32_t thread, const Slot& s, bool need_cert);
    void integrate(const BlockPtr& b, bool requested, TimeMs now, Outbox& out,
                   std::vector<Slot>& accepted_slots);
    void register_certificate(const CertKey& key, TimeMs now, Outbox& out, bool broadcast);
    void try_form_certificate(const CertKey& key, TimeMs now, Outbox& out);
    void request(const BlockId& id, TimeMs now, Outbox& out);
    void record_block_denunciation(const Occupant& first, const Block& second);
    void note_block_broadcast(const Slot& s, bool requested);
    void mark_stale(const BlockId& id);
    void expire_uncertified(TimeMs now);
    bool revive(const BlockId& id, TimeMs now, Outbox& out);
    void run_finalizer();
    void execute_settled();
    void prune();
    void emit(Outbox& out, Envelope e);

    NodeId id_;
    ProtocolParams params_;
    std::shared_ptr<const Committee> committee_;
    const KeyRegistry* registry_;
    Signer signer_;
    Verifier verifier_;

    BlockGraph g_;
    CompatGraph gc_;
    std::unordered_set<BlockId> stale_;
    std::map<Slot, std::vector<BlockId>> stale_by_slot_;
    CliqueReport report_;
    bool dirty_ = true;

    std::map<Slot, std::map<std::uint32_t, Endorsement>> endorsements_;
    std::map<CertKey, Certificate> certs_;
    std::map<Slot, Denunciation> block_denunciations_;
    std::map<std::pair<Slot, std::uint32_t>, Denunciation> endorsement_denunciations_;
    std::set<std::pair<Slot, std::uint32_t>> endorsed_;
    std::map<Slot, Occupant> occupants_;
    std::map<Slot, std::uint32_t> broadcasts_;
    std::unordered_map<BlockId, TimeMs> requests_;
    std::unordered_map<BlockId, BlockPtr> deferred_;
    std::unordered_map<BlockId, bool> deferred_requested_;
    std::unordered_map<BlockId, std::vector<BlockId>> waiting_;
    std::map<BlockId, BlockPtr> expired_;

    Ledger ledger_;
    Slot exec_cursor_{0, 1};
    std::vector<std::deque<Transaction>> mempool_;
    std::uint64_t horizon_ = 0;
    bool passive_ = false;
    NodeMetrics metrics_;
};

}  // namespace nasdag
