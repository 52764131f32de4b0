#include "nasdag/messages.hpp"

#include "nasdag/serialize.hpp"

namespace nasdag {

Digest signing_payload(MsgDomain domain, const Slot& slot, std::uint32_t index,
                       const Digest& content) {
    return Sha256()
        .update("payload")
        .update_u8(static_cast<std::uint8_t>(domain))
        .update_u32(slot.thread)
        .update_u64(slot.period)
        .update_u32(index)
        .update(content)
        .finish();
}

const char* to_string(Denunciation::Kind k) {
    return k == Denunciation::Kind::double_block ? "double_block" : "double_endorsement";
}

Digest Transaction::content_digest() const {
    Writer w;
    write(w, *this, false);
    return sha256(w.bytes());
}

Digest Transaction::expected_payload() const {
    return signing_payload(MsgDomain::transaction, Slot{}, 0, content_digest());
}

Transaction Transaction::make(const Signer& signer, const Address& receiver, Coins amount, Coins fee,
                              std::uint64_t nonce) {
    Transaction tx;
    tx.sender = signer.address();
    tx.receiver = receiver;
    tx.amount = amount;
    tx.fee = fee;
    tx.nonce = nonce;
    tx.sig = signer.sign(tx.expected_payload());
    return tx;
}

void Endorsement::seal() {
    Writer w;
    write(w, *this, false);
    content = sha256(w.bytes());
    payload = signing_payload(MsgDomain::endorsement, slot, index, content);
}

Endorsement Endorsement::make(const Signer& signer, const Slot& slot, std::uint32_t index,
                              const BlockId& endorsed) {
    Endorsement e;
    e.slot = slot;
    e.index = index;
    e.endorsed = endorsed;
    e.endorser = signer.address();
    e.seal();
    e.sig = signer.sign(e.payload);
    return e;
}

void Block::seal() {
    Writer w;
    write(w, *this, false);
    const Digest content = sha256(w.bytes());
    id = retag<BlockId>(content);
    payload = signing_payload(MsgDomain::block, slot, 0, content);
    encoded_size = w.bytes().size() + 96;
}

void Block::sign_with(const Signer& signer) {
    producer = signer.address();
    seal();
    sig = signer.sign(payload);
}

Block Block::genesis(std::uint32_t thread) {
    Block b;
    b.slot = Slot{thread, 0};
    b.seal();
    return b;
}

BlockPtr make_block_ptr(Block b) {
    return std::make_shared<const Block>(std::move(b));
}

}  // namespace nasdag
