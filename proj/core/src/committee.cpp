#include "nasdag/committee.hpp"

#include <algorithm>
#include <limits>

namespace nasdag {

StakeTable::StakeTable(const std::map<Address, Coins>& stakes, std::uint64_t snapshot_period)
    : snapshot_period_(snapshot_period) {
    if (stakes.empty()) throw ConfigError("empty stake table");
    for (const auto& [addr, stake] : stakes) {
        if (stake == 0) throw ConfigError("stake entries must be positive");
        entries_.emplace_back(addr, stake);
        total_ += stake;
        cumulative_.push_back(total_);
    }
}

Coins StakeTable::stake_of(const Address& a) const {
    auto it = std::lower_bound(entries_.begin(), entries_.end(), a,
                               [](const auto& e, const Address& x) { return e.first < x; });
    return (it != entries_.end() && it->first == a) ? it->second : 0;
}

std::size_t StakeTable::locate(Coins r) const {
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), r);
    return static_cast<std::size_t>(it - cumulative_.begin());
}

Coins prf_uniform(const Digest& seed, std::string_view domain, const Slot& slot, std::uint32_t index,
                  Coins bound) {
    // 2^64 mod bound values at the top of the range are redrawn.
    const Coins max = std::numeric_limits<Coins>::max();
    const Coins rem = (max % bound + 1) % bound;
    for (std::uint64_t counter = 0;; ++counter) {
        const Digest d = Sha256()
                             .update(seed)
                             .update(domain)
                             .update_u32(slot.thread)
                             .update_u64(slot.period)
                             .update_u32(index)
                             .update_u64(counter)
                             .finish();
        const Coins r = d.prefix64();
        if (rem == 0 || r <= max - rem) return r % bound;
    }
}

static std::size_t draw_producer(const Slot& s, const StakeTable& stakes, const Digest& seed) {
    if (stakes.empty()) throw ConfigError("empty stake table");
    return stakes.locate(prf_uniform(seed, "producer", s, 0, stakes.total()));
}

static std::size_t draw_endorser(const Slot& s, std::uint32_t index, const StakeTable& stakes,
                                 const Digest& seed) {
    return stakes.locate(prf_uniform(seed, "endorser", s, index, stakes.total()));
}

Address committee_block_producer(const Slot& s, const StakeTable& stakes, const Digest& seed) {
    return stakes.address(draw_producer(s, stakes, seed));
}

std::vector<Address> committee_endorsers(const Slot& s, const StakeTable& stakes, const Digest& seed,
                                         std::uint32_t count) {
    if (stakes.empty()) throw ConfigError("empty stake table");
    std::vector<Address> out;
    out.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i)
        out.push_back(stakes.address(draw_endorser(s, i, stakes, seed)));
    return out;
}

Committee::Committee(std::shared_ptr<const StakeTable> stakes, const Digest& seed,
                     std::uint32_t endorsers)
    : stakes_(std::move(stakes)), seed_(seed), count_(endorsers) {
    if (!stakes_ || stakes_->empty()) throw ConfigError("empty stake table");
}

const CommitteeDraw& Committee::draw(const Slot& s) const {
    auto it = cache_.find(s);
    if (it != cache_.end()) return it->second;
    CommitteeDraw d;
    d.slot = s;
    d.producer = static_cast<std::uint32_t>(draw_producer(s, *stakes_, seed_));
    d.endorsers.reserve(count_);
    for (std::uint32_t i = 0; i < count_; ++i)
        d.endorsers.push_back(static_cast<std::uint32_t>(draw_endorser(s, i, *stakes_, seed_)));
    return cache_.emplace(s, std::move(d)).first->second;
}

std::vector<std::uint32_t> Committee::indices_of(const Slot& s, const Address& a) const {
    std::vector<std::uint32_t> out;
    const auto& d = draw(s);
    for (std::uint32_t i = 0; i < d.endorsers.size(); ++i)
        if (stakes_->address(d.endorsers[i]) == a) out.push_back(i);
    return out;
}

void Committee::prune_before(std::uint64_t period) const {
    cache_.erase(cache_.begin(), cache_.lower_bound(Slot{0, period}));
}

}  // namespace nasdag
