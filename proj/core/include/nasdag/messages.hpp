#pragma once

#include <cstdint>
#include <memory>
#include <variant>
#include <vector>

#include "nasdag/crypto.hpp"
#include "nasdag/types.hpp"

namespace nasdag {

enum class MsgDomain : std::uint8_t {
    transaction = 1,
    endorsement = 2,
    block = 3,
    certificate = 4,
    denunciation = 5,
};

/// What actually gets signed: binds domain, slot and index to a content digest
/// so that denunciation evidence can be checked from the digest alone.
Digest signing_payload(MsgDomain domain, const Slot& slot, std::uint32_t index,
                       const Digest& content);

struct Transaction {
    Address sender{};
    Address receiver{};
    Coins amount = 0;
    Coins fee = 0;
    std::uint64_t nonce = 0;
    ModeledSignature sig{};

    Digest content_digest() const;
    Digest expected_payload() const;
    static Transaction make(const Signer& signer, const Address& receiver, Coins amount, Coins fee,
                            std::uint64_t nonce);
    bool operator==(const Transaction& o) const {
        return sender == o.sender && receiver == o.receiver && amount == o.amount && fee == o.fee &&
               nonce == o.nonce && sig == o.sig;
    }
};

struct Endorsement {
    Slot slot{};
    std::uint32_t index = 0;
    BlockId endorsed{};
    Address endorser{};
    ModeledSignature sig{};

    // Derived by seal(); never serialized.
    Digest content{};
    Digest payload{};

    void seal();
    static Endorsement make(const Signer& signer, const Slot& slot, std::uint32_t index,
                            const BlockId& endorsed);
    bool same_as(const Endorsement& o) const { return content == o.content && sig == o.sig; }
    bool operator==(const Endorsement& o) const {
        return slot == o.slot && index == o.index && endorsed == o.endorsed &&
               endorser == o.endorser && sig == o.sig;
    }
};

struct Certificate {
    Slot slot{};
    BlockId endorsed{};
    std::vector<Endorsement> endorsements;

    bool operator==(const Certificate& o) const {
        return slot == o.slot && endorsed == o.endorsed && endorsements == o.endorsements;
    }
};

struct Evidence {
    Digest content{};
    ModeledSignature sig{};
    bool operator==(const Evidence&) const = default;
};

struct Denunciation {
    enum class Kind : std::uint8_t { double_block = 1, double_endorsement = 2 };

    Kind kind = Kind::double_block;
    Slot slot{};
    std::uint32_t index = 0;
    Address offender{};
    Evidence a{};
    Evidence b{};

    bool operator==(const Denunciation&) const = default;
};

const char* to_string(Denunciation::Kind k);

using Operation = std::variant<Transaction, Denunciation>;

struct ParentRef {
    BlockId id{};
    Slot slot{};
    bool operator==(const ParentRef&) const = default;
};

struct Block {
    Slot slot{};
    std::vector<ParentRef> parents;
    std::vector<Certificate> certificates;
    std::vector<Operation> operations;
    Address producer{};
    ModeledSignature sig{};

    // Derived by seal(); never serialized.
    BlockId id{};
    Digest payload{};
    std::size_t encoded_size = 0;

    bool is_genesis() const { return parents.empty(); }
    const ParentRef& thread_parent() const { return parents.at(slot.thread); }

    void seal();
    /// Fills producer, seals the content and signs it.
    void sign_with(const Signer& signer);
    static Block genesis(std::uint32_t thread);

    bool operator==(const Block& o) const {
        return slot == o.slot && parents == o.parents && certificates == o.certificates &&
               operations == o.operations && producer == o.producer && sig == o.sig;
    }
};

using BlockPtr = std::shared_ptr<const Block>;

BlockPtr make_block_ptr(Block b);

}  // namespace nasdag
