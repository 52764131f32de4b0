#include "nasdag/ledger.hpp"

namespace nasdag {

void Ledger::fund(const Address& a, Coins balance, Coins deposit) {
    auto& acc = accounts_[a];
    acc.balance += balance;
    acc.deposit += deposit;
}

const Account* Ledger::account(const Address& a) const {
    auto it = accounts_.find(a);
    return it == accounts_.end() ? nullptr : &it->second;
}

Coins Ledger::balance(const Address& a) const {
    const auto* acc = account(a);
    return acc ? acc->balance : 0;
}

Coins Ledger::deposit(const Address& a) const {
    const auto* acc = account(a);
    return acc ? acc->deposit : 0;
}

Coins Ledger::total_supply() const {
    Coins s = 0;
    for (const auto& [a, acc] : accounts_) s += acc.balance + acc.deposit;
    return s;
}

static std::tuple<int, Address, Slot, std::uint32_t> punish_key(const Denunciation& d) {
    return {static_cast<int>(d.kind), d.offender, d.slot, d.index};
}

bool Ledger::already_punished(const Denunciation& d) const {
    return punished_.count(punish_key(d)) != 0;
}

ExecutionRecord Ledger::execute(const Block& b, const ProducerLookup& producer_of) {
    ExecutionRecord rec;
    rec.block = b.id;
    rec.slot = b.slot;
    const Coins before = total_supply();

    for (const auto& op : b.operations) {
        if (const auto* tx = std::get_if<Transaction>(&op)) {
            auto& from = accounts_[tx->sender];
            const Coins cost = tx->amount + tx->fee;
            if (tx->nonce != from.next_nonce || from.balance < cost || cost < tx->amount) {
                ++rec.transactions_skipped;
                continue;
            }
            from.balance -= cost;
            from.next_nonce += 1;
            credit(tx->receiver, tx->amount);
            credit(b.producer, tx->fee);
            ++rec.transactions_applied;
        } else {
            const auto& d = std::get<Denunciation>(op);
            if (!punished_.insert(punish_key(d)).second) continue;
            auto& off = accounts_[d.offender];
            const Coins penalty = std::min(econ_.penalty, off.deposit);
            off.deposit -= penalty;
            const Coins burned = penalty / 2;
            credit(b.producer, penalty - burned);
            rec.burned += burned;
            ++rec.slashes;
        }
    }

    credit(b.producer, econ_.block_reward);
    rec.minted += econ_.block_reward;
    const Coins share = econ_.endorsement_reward / 3;
    for (const auto& c : b.certificates) {
        const auto endorsed_producer = producer_of(c.endorsed);
        const Address& third = (endorsed_producer && !endorsed_producer->is_zero()) ? *endorsed_producer
                                                                                   : b.producer;
        for (const auto& e : c.endorsements) {
            credit(b.producer, share);
            credit(e.endorser, share);
            credit(third, share);
            rec.minted += 3 * share;
            ++rec.endorsements_rewarded;
        }
    }

    const Coins after = total_supply();
    rec.supply_delta = static_cast<std::int64_t>(after) - static_cast<std::int64_t>(before);
    rec.conserved = rec.supply_delta ==
                    static_cast<std::int64_t>(rec.minted) - static_cast<std::int64_t>(rec.burned);
    return rec;
}

Digest Ledger::state_digest() const {
    Sha256 h;
    h.update("ledger");
    for (const auto& [a, acc] : accounts_) {
        h.update(a);
        h.update_u64(acc.balance);
        h.update_u64(acc.deposit);
        h.update_u64(acc.next_nonce);
    }
    return h.finish();
}

}  // namespace nasdag
