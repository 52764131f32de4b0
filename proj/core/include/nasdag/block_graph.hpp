#pragma once

#include <map>
#include <optional>
#include <unordered_map>
#include <vector>

#include "nasdag/messages.hpp"

namespace nasdag {

/// Index entry kept for every finalized block after its body leaves the graph.
struct FinalRecord {
    Slot slot{};
    std::vector<ParentRef> parents;
    Address producer{};
    BlockPtr body;  // dropped once executed and old enough
    bool executed = false;
};

/// The block DAG G over non-finalized blocks, plus the retained index of
/// finalized ones. Insertion order is topological because parents are
/// strictly older than children.
class BlockGraph {
public:
    explicit BlockGraph(std::uint32_t threads);

    /// Adds b as an active vertex. Returns false if already known.
    bool append(BlockPtr b);

    bool contains(const BlockId& id) const { return is_active(id) || is_final(id); }
    bool is_active(const BlockId& id) const { return active_.count(id) != 0; }
    bool is_final(const BlockId& id) const { return final_.count(id) != 0; }

    /// Active body or retained final body; null otherwise.
    BlockPtr body(const BlockId& id) const;
    std::optional<Slot> slot_of(const BlockId& id) const;
    const std::vector<ParentRef>* parents_of(const BlockId& id) const;
    std::optional<Address> producer_of(const BlockId& id) const;
    const FinalRecord* final_record(const BlockId& id) const;
    FinalRecord* final_record(const BlockId& id);

    /// True iff a is a proper ancestor of d. Walks the thread parents of a's
    /// thread only, so it assumes consistent parent views as valid blocks have.
    bool is_ancestor(const BlockId& a, const BlockId& d) const;
    bool is_ancestor_or_self(const BlockId& a, const BlockId& d) const {
        return a == d || is_ancestor(a, d);
    }

    const std::vector<BlockId>& children(const BlockId& id) const;

    /// Moves an active block into the finalized index.
    void mark_final(const BlockId& id);
    /// Drops an active block (stale or discarded).
    void remove(const BlockId& id);

    /// Active ids ordered by (slot, id): a topological order.
    std::vector<BlockId> topological_order() const;
    const std::map<Slot, std::vector<BlockId>>& active_by_slot() const { return by_slot_; }

    std::optional<BlockId> latest_final(std::uint32_t thread) const;
    /// Period of the latest final block of a thread; genesis counts as period 0.
    std::optional<std::uint64_t> latest_final_period(std::uint32_t thread) const;
    /// Finalized block at an exact slot.
    std::optional<BlockId> final_at(const Slot& s) const;
    const std::map<Slot, BlockId>& final_by_slot() const { return final_by_slot_; }

    std::size_t active_count() const { return active_.size(); }
    std::size_t edge_count() const { return edges_; }
    std::size_t final_count() const { return final_.size(); }
    std::uint32_t threads() const { return threads_; }

    /// Drops executed final bodies with period below the horizon.
    void prune_bodies(std::uint64_t before_period);

private:
    struct Node {
        BlockPtr block;
        std::vector<BlockId> children;
    };

    std::uint32_t threads_;
    std::unordered_map<BlockId, Node> active_;
    std::unordered_map<BlockId, FinalRecord> final_;
    std::map<Slot, std::vector<BlockId>> by_slot_;
    std::map<Slot, BlockId> final_by_slot_;
    std::vector<std::optional<BlockId>> latest_final_;
    std::size_t edges_ = 0;
    std::uint64_t pruned_below_ = 0;
};

}  // namespace nasdag
