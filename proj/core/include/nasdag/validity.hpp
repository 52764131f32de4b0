#pragma once

#include <functional>
#include <optional>
#include <span>
#include <unordered_set>
#include <vector>

#include "nasdag/committee.hpp"
#include "nasdag/compat_graph.hpp"
#include "nasdag/messages.hpp"

namespace nasdag {

enum class Reason {
    ok,
    bad_signature,
    wrong_draw,
    bad_structure,
    below_threshold,
    mixed_block,
    mixed_slot,
    duplicate_index,
    invalid_endorsement,
    no_certificate,
    cert_wrong_parent,
    cert_period_mismatch,
    parent_not_older,
    parents_incompatible,
    grandparent_inconsistent,
    too_early,
    wrong_producer,
    oversized,
    wrong_shard,
    bad_denunciation,
    stale_parent,
    conflicts_finalized,
};

const char* to_string(Reason r);

struct Verdict {
    enum class Kind { accept, reject, defer };
    Kind kind = Kind::accept;
    Reason reason = Reason::ok;
    std::vector<BlockId> missing;

    static Verdict accept() { return {}; }
    static Verdict reject(Reason r) { return {Kind::reject, r, {}}; }
    static Verdict defer(std::vector<BlockId> m) { return {Kind::defer, Reason::ok, std::move(m)}; }
    bool accepted() const { return kind == Kind::accept; }
};

/// Already-verified endorsements, so re-checking them costs no signature.
using KnownEndorsement = std::function<bool(const Endorsement&)>;

struct ValidationContext {
    const ProtocolParams& params;
    const Committee& committee;
    Verifier& verifier;
    KnownEndorsement known = nullptr;
};

Reason check_endorsement(const Endorsement& e, ValidationContext& ctx);
Reason check_certificate(const Certificate& c, ValidationContext& ctx);
Reason check_transaction(const Transaction& tx, std::uint32_t thread, ValidationContext& ctx);
Reason check_denunciation(const Denunciation& d, ValidationContext& ctx);

inline bool is_valid_endorsement(const Endorsement& e, ValidationContext& ctx) {
    return check_endorsement(e, ctx) == Reason::ok;
}
inline bool is_valid_certificate(const Certificate& c, ValidationContext& ctx) {
    return check_certificate(c, ctx) == Reason::ok;
}

/// Largest group by endorsed block (ties to the smaller id), distinct indices,
/// sorted by index; none when that group is below threshold.
std::optional<Certificate> build_cert(std::span<const Endorsement> pool, std::uint32_t threshold);
/// Same, restricted to endorsements of one block.
std::optional<Certificate> build_cert_for(std::span<const Endorsement> pool, const BlockId& block,
                                          std::uint32_t threshold);

/// Local view of the chain a block is validated against.
struct ChainView {
    const BlockGraph& g;
    const CompatGraph& gc;
    const std::unordered_set<BlockId>& stale;
};

bool parents_older_than_block(const Block& b, const ChainView& view);
bool parents_mutually_compatible(const Block& b, const ChainView& view);
bool grandparent_older_than_parent(const Block& b, const ChainView& view);
/// Certificate rules only; certificate validity itself is checked separately.
Reason certificates_endorse_right_parent(const Block& b);

/// Context-free checks: structure, timing, producer draw, size, signature,
/// operation sharding. now is the validator's local clock.
Reason check_block_header(const Block& b, ValidationContext& ctx, TimeMs now);
/// Missing parents, if any.
std::vector<BlockId> missing_parents(const Block& b, const ChainView& view);
/// Certificates, operations and graph-contextual rules. Parents must be present.
Reason check_block_body(const Block& b, ValidationContext& ctx, const ChainView& view);

/// Full three-valued check.
Verdict is_valid_block(const Block& b, ValidationContext& ctx, const ChainView& view, TimeMs now);

}  // namespace nasdag
