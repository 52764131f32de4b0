#pragma once

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <tuple>

#include "nasdag/messages.hpp"

namespace nasdag {

struct Account {
    Coins balance = 0;
    Coins deposit = 0;
    std::uint64_t next_nonce = 0;
    bool operator==(const Account&) const = default;
};

struct ExecutionRecord {
    BlockId block{};
    Slot slot{};
    Coins minted = 0;
    Coins burned = 0;
    std::int64_t supply_delta = 0;
    std::size_t endorsements_rewarded = 0;
    std::size_t transactions_applied = 0;
    std::size_t transactions_skipped = 0;
    std::size_t slashes = 0;
    bool conserved = true;
};

/// Coin balances and deposits. Executes final blocks atomically; all amounts
/// are integer units.
class Ledger {
public:
    using ProducerLookup = std::function<std::optional<Address>(const BlockId&)>;

    explicit Ledger(Economics econ = {}) : econ_(econ) {}

    void fund(const Address& a, Coins balance, Coins deposit);
    const Account* account(const Address& a) const;
    Coins balance(const Address& a) const;
    Coins deposit(const Address& a) const;
    Coins total_supply() const;

    /// Applies b. producer_of resolves the producer of endorsed blocks; an
    /// unknown or genesis block credits b's producer instead.
    ExecutionRecord execute(const Block& b, const ProducerLookup& producer_of);

    bool already_punished(const Denunciation& d) const;
    Digest state_digest() const;
    const std::map<Address, Account>& accounts() const { return accounts_; }
    const Economics& economics() const { return econ_; }

private:
    void credit(const Address& a, Coins amount) { accounts_[a].balance += amount; }

    Economics econ_;
    std::map<Address, Account> accounts_;
    std::set<std::tuple<int, Address, Slot, std::uint32_t>> punished_;
};

}  // namespace nasdag
