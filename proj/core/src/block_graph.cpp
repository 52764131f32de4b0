#include "nasdag/block_graph.hpp"

#include <algorithm>

namespace nasdag {

BlockGraph::BlockGraph(std::uint32_t threads) : threads_(threads), latest_final_(threads) {}

bool BlockGraph::append(BlockPtr b) {
    const BlockId id = b->id;
    if (contains(id)) return false;
    for (const auto& p : b->parents) {
        auto it = active_.find(p.id);
        if (it != active_.end()) it->second.children.push_back(id);
    }
    edges_ += b->parents.size();
    by_slot_[b->slot].push_back(id);
    active_.emplace(id, Node{std::move(b), {}});
    return true;
}

BlockPtr BlockGraph::body(const BlockId& id) const {
    if (auto it = active_.find(id); it != active_.end()) return it->second.block;
    if (auto it = final_.find(id); it != final_.end()) return it->second.body;
    return nullptr;
}

std::optional<Slot> BlockGraph::slot_of(const BlockId& id) const {
    if (auto it = active_.find(id); it != active_.end()) return it->second.block->slot;
    if (auto it = final_.find(id); it != final_.end()) return it->second.slot;
    return std::nullopt;
}

const std::vector<ParentRef>* BlockGraph::parents_of(const BlockId& id) const {
    if (auto it = active_.find(id); it != active_.end()) return &it->second.block->parents;
    if (auto it = final_.find(id); it != final_.end()) return &it->second.parents;
    return nullptr;
}

std::optional<Address> BlockGraph::producer_of(const BlockId& id) const {
    if (auto it = active_.find(id); it != active_.end()) return it->second.block->producer;
    if (auto it = final_.find(id); it != final_.end()) return it->second.producer;
    return std::nullopt;
}

const FinalRecord* BlockGraph::final_record(const BlockId& id) const {
    auto it = final_.find(id);
    return it == final_.end() ? nullptr : &it->second;
}

FinalRecord* BlockGraph::final_record(const BlockId& id) {
    auto it = final_.find(id);
    return it == final_.end() ? nullptr : &it->second;
}

bool BlockGraph::is_ancestor(const BlockId& a, const BlockId& d) const {
    const auto sa = slot_of(a);
    if (!sa) return false;
    const std::uint32_t t = sa->thread;
    BlockId x = d;
    while (true) {
        const auto* ps = parents_of(x);
        if (ps == nullptr || ps->empty()) return false;
        const ParentRef& p = (*ps)[t];
        if (p.id == a) return true;
        if (p.slot <= *sa) return false;
        x = p.id;
    }
}

const std::vector<BlockId>& BlockGraph::children(const BlockId& id) const {
    static const std::vector<BlockId> none;
    auto it = active_.find(id);
    return it == active_.end() ? none : it->second.children;
}

static void erase_from_slot(std::map<Slot, std::vector<BlockId>>& by_slot, const Slot& s,
                            const BlockId& id) {
    auto it = by_slot.find(s);
    if (it == by_slot.end()) return;
    auto& v = it->second;
    v.erase(std::remove(v.begin(), v.end(), id), v.end());
    if (v.empty()) by_slot.erase(it);
}

void BlockGraph::mark_final(const BlockId& id) {
    auto it = active_.find(id);
    if (it == active_.end()) return;
    const BlockPtr b = it->second.block;
    edges_ -= b->parents.size();
    erase_from_slot(by_slot_, b->slot, id);
    active_.erase(it);
    FinalRecord rec;
    rec.slot = b->slot;
    rec.parents = b->parents;
    rec.producer = b->producer;
    rec.body = b;
    final_.emplace(id, std::move(rec));
    final_by_slot_[b->slot] = id;
    auto& lf = latest_final_[b->slot.thread];
    if (!lf || final_.at(*lf).slot < b->slot) lf = id;
}

void BlockGraph::remove(const BlockId& id) {
    auto it = active_.find(id);
    if (it == active_.end()) return;
    const BlockPtr b = it->second.block;
    edges_ -= b->parents.size();
    erase_from_slot(by_slot_, b->slot, id);
    for (const auto& p : b->parents) {
        auto pit = active_.find(p.id);
        if (pit == active_.end()) continue;
        auto& ch = pit->second.children;
        ch.erase(std::remove(ch.begin(), ch.end(), id), ch.end());
    }
    active_.erase(it);
}

std::vector<BlockId> BlockGraph::topological_order() const {
    std::vector<BlockId> out;
    out.reserve(active_.size());
    for (const auto& [slot, ids] : by_slot_) {
        std::vector<BlockId> sorted = ids;
        std::sort(sorted.begin(), sorted.end());
        out.insert(out.end(), sorted.begin(), sorted.end());
    }
    return out;
}

std::optional<BlockId> BlockGraph::latest_final(std::uint32_t thread) const {
    return latest_final_.at(thread);
}

std::optional<std::uint64_t> BlockGraph::latest_final_period(std::uint32_t thread) const {
    const auto& lf = latest_final_.at(thread);
    if (!lf) return std::nullopt;
    return final_.at(*lf).slot.period;
}

std::optional<BlockId> BlockGraph::final_at(const Slot& s) const {
    auto it = final_by_slot_.find(s);
    if (it == final_by_slot_.end()) return std::nullopt;
    return it->second;
}

void BlockGraph::prune_bodies(std::uint64_t before_period) {
    if (before_period <= pruned_below_) return;
    for (auto it = final_by_slot_.lower_bound(Slot{0, pruned_below_});
         it != final_by_slot_.end() && it->first.period < before_period; ++it) {
        auto& rec = final_.at(it->second);
        if (!rec.executed) {
            before_period = it->first.period;
            break;
        }
        rec.body.reset();
    }
    pruned_below_ = before_period;
}

}  // namespace nasdag
