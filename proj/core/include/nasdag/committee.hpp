#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <unordered_map>
#include <vector>

#include "nasdag/types.hpp"

namespace nasdag {

class StakeTable {
public:
    StakeTable() = default;
    /// Throws ConfigError on zero stakes or an empty table.
    explicit StakeTable(const std::map<Address, Coins>& stakes, std::uint64_t snapshot_period = 0);

    bool empty() const { return entries_.empty(); }
    std::size_t size() const { return entries_.size(); }
    Coins total() const { return total_; }
    std::uint64_t snapshot_period() const { return snapshot_period_; }
    const Address& address(std::size_t i) const { return entries_[i].first; }
    Coins stake(std::size_t i) const { return entries_[i].second; }
    Coins stake_of(const Address& a) const;
    /// Index of the entry owning position r of the cumulative stake line.
    std::size_t locate(Coins r) const;

private:
    std::vector<std::pair<Address, Coins>> entries_;  // sorted by address
    std::vector<Coins> cumulative_;                   // exclusive prefix ends
    Coins total_ = 0;
    std::uint64_t snapshot_period_ = 0;
};

/// Uniform integer in [0, bound) from the PRF, by rejection sampling.
Coins prf_uniform(const Digest& seed, std::string_view domain, const Slot& slot, std::uint32_t index,
                  Coins bound);

Address committee_block_producer(const Slot& s, const StakeTable& stakes, const Digest& seed);
std::vector<Address> committee_endorsers(const Slot& s, const StakeTable& stakes, const Digest& seed,
                                         std::uint32_t count);

struct CommitteeDraw {
    Slot slot{};
    std::uint32_t producer = 0;           // index into the stake table
    std::vector<std::uint32_t> endorsers;  // one stake-table index per endorsement index
};

/// Memoizing view over the pure draw functions. Shared by every node of a
/// simulation; entries older than a pruning horizon can be dropped.
class Committee {
public:
    Committee(std::shared_ptr<const StakeTable> stakes, const Digest& seed, std::uint32_t endorsers);

    const CommitteeDraw& draw(const Slot& s) const;
    const Address& producer(const Slot& s) const { return stakes_->address(draw(s).producer); }
    const Address& endorser(const Slot& s, std::uint32_t index) const {
        return stakes_->address(draw(s).endorsers.at(index));
    }
    std::vector<std::uint32_t> indices_of(const Slot& s, const Address& a) const;
    const StakeTable& stakes() const { return *stakes_; }
    std::uint32_t endorser_count() const { return count_; }
    void prune_before(std::uint64_t period) const;

private:
    std::shared_ptr<const StakeTable> stakes_;
    Digest seed_;
    std::uint32_t count_;
    mutable std::map<Slot, CommitteeDraw> cache_;
};

}  // namespace nasdag
