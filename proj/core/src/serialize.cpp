#include "nasdag/serialize.hpp"

#include <algorithm>

namespace nasdag {

void Writer::u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void Writer::u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void Reader::need(std::size_t n) const {
    if (in_.size() - pos_ < n) throw DecodeError("truncated input");
}

std::uint8_t Reader::u8() {
    need(1);
    return in_[pos_++];
}

std::uint32_t Reader::u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(in_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
}

std::uint64_t Reader::u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(in_[pos_ + i]) << (8 * i);
    pos_ += 8;
    return v;
}

Slot Reader::slot() {
    Slot s;
    s.thread = u32();
    s.period = u64();
    return s;
}

ModeledSignature Reader::signature() {
    ModeledSignature s;
    s.signer = hash<AddressTag>();
    s.payload = hash<DigestTag>();
    s.tag = hash<DigestTag>();
    return s;
}

std::uint32_t Reader::count(std::size_t min_element_size) {
    std::uint32_t n = u32();
    if (min_element_size > 0 && static_cast<std::size_t>(n) > (in_.size() - pos_) / min_element_size)
        throw DecodeError("element count exceeds input");
    return n;
}

void Reader::expect_done() const {
    if (!done()) throw DecodeError("trailing bytes");
}

static void expect_tag(Reader& r, std::uint8_t tag) {
    if (r.u8() != tag) throw DecodeError("unexpected type tag");
}

void write(Writer& w, const Transaction& tx, bool with_signature) {
    w.u8(kTagTransaction);
    w.hash(tx.sender);
    w.hash(tx.receiver);
    w.u64(tx.amount);
    w.u64(tx.fee);
    w.u64(tx.nonce);
    if (with_signature) w.signature(tx.sig);
}

void write(Writer& w, const Endorsement& e, bool with_signature) {
    w.u8(kTagEndorsement);
    w.slot(e.slot);
    w.u32(e.index);
    w.hash(e.endorsed);
    w.hash(e.endorser);
    if (with_signature) w.signature(e.sig);
}

void write(Writer& w, const Certificate& c) {
    w.u8(kTagCertificate);
    w.slot(c.slot);
    w.hash(c.endorsed);
    w.u32(static_cast<std::uint32_t>(c.endorsements.size()));
    for (const auto& e : c.endorsements) write(w, e);
}

static void write_evidence(Writer& w, const Evidence& ev) {
    w.hash(ev.content);
    w.signature(ev.sig);
}

void write(Writer& w, const Denunciation& d) {
    w.u8(kTagDenunciation);
    w.u8(static_cast<std::uint8_t>(d.kind));
    w.slot(d.slot);
    w.u32(d.index);
    w.hash(d.offender);
    write_evidence(w, d.a);
    write_evidence(w, d.b);
}

void write(Writer& w, const Block& b, bool with_signature) {
    w.u8(kTagBlock);
    w.slot(b.slot);
    w.u32(static_cast<std::uint32_t>(b.parents.size()));
    for (const auto& p : b.parents) {
        w.hash(p.id);
        w.slot(p.slot);
    }
    w.u32(static_cast<std::uint32_t>(b.certificates.size()));
    for (const auto& c : b.certificates) write(w, c);
    w.u32(static_cast<std::uint32_t>(b.operations.size()));
    for (const auto& op : b.operations) std::visit([&](const auto& x) { write(w, x); }, op);
    w.hash(b.producer);
    if (with_signature) w.signature(b.sig);
}

Transaction read_transaction(Reader& r) {
    expect_tag(r, kTagTransaction);
    Transaction tx;
    tx.sender = r.hash<AddressTag>();
    tx.receiver = r.hash<AddressTag>();
    tx.amount = r.u64();
    tx.fee = r.u64();
    tx.nonce = r.u64();
    tx.sig = r.signature();
    return tx;
}

Endorsement read_endorsement(Reader& r) {
    expect_tag(r, kTagEndorsement);
    Endorsement e;
    e.slot = r.slot();
    e.index = r.u32();
    e.endorsed = r.hash<BlockIdTag>();
    e.endorser = r.hash<AddressTag>();
    e.sig = r.signature();
    e.seal();
    return e;
}

Certificate read_certificate(Reader& r) {
    expect_tag(r, kTagCertificate);
    Certificate c;
    c.slot = r.slot();
    c.endorsed = r.hash<BlockIdTag>();
    const std::uint32_t n = r.count(1 + 12 + 4 + 64 + 96);
    c.endorsements.reserve(n);
    for (std::uint32_t i = 0; i < n; ++i) c.endorsements.push_back(read_endorsement(r));
    return c;
}

static Evidence read_evidence(Reader& r) {
    Evidence ev;
    ev.content = r.hash<DigestTag>();
    ev.sig = r.signature();
    return ev;
}

Denunciation read_denunciation(Reader& r) {
    expect_tag(r, kTagDenunciation);
    Denunciation d;
    const std::uint8_t kind = r.u8();
    if (kind != 1 && kind != 2) throw DecodeError("bad denunciation kind");
    d.kind = static_cast<Denunciation::Kind>(kind);
    d.slot = r.slot();
    d.index = r.u32();
    d.offender = r.hash<AddressTag>();
    d.a = read_evidence(r);
    d.b = read_evidence(r);
    return d;
}

Block read_block(Reader& r) {
    expect_tag(r, kTagBlock);
    Block b;
    b.slot = r.slot();
    const std::uint32_t np = r.count(32 + 12);
    b.parents.reserve(np);
    for (std::uint32_t i = 0; i < np; ++i) {
        ParentRef p;
        p.id = r.hash<BlockIdTag>();
        p.slot = r.slot();
        b.parents.push_back(p);
    }
    const std::uint32_t nc = r.count(1 + 12 + 32 + 4);
    b.certificates.reserve(nc);
    for (std::uint32_t i = 0; i < nc; ++i) b.certificates.push_back(read_certificate(r));
    const std::uint32_t no = r.count(1);
    b.operations.reserve(no);
    for (std::uint32_t i = 0; i < no; ++i) {
        Reader peek = r;
        const std::uint8_t tag = peek.u8();
        if (tag == kTagTransaction)
            b.operations.emplace_back(read_transaction(r));
        else if (tag == kTagDenunciation)
            b.operations.emplace_back(read_denunciation(r));
        else
            throw DecodeError("bad operation tag");
    }
    b.producer = r.hash<AddressTag>();
    b.sig = r.signature();
    b.seal();
    return b;
}

template <class T, class F>
static T decode_whole(std::span<const std::uint8_t> in, F read) {
    Reader r(in);
    T item = read(r);
    r.expect_done();
    return item;
}

Transaction deserialize_transaction(std::span<const std::uint8_t> in) {
    return decode_whole<Transaction>(in, read_transaction);
}
Endorsement deserialize_endorsement(std::span<const std::uint8_t> in) {
    return decode_whole<Endorsement>(in, read_endorsement);
}
Certificate deserialize_certificate(std::span<const std::uint8_t> in) {
    return decode_whole<Certificate>(in, read_certificate);
}
Denunciation deserialize_denunciation(std::span<const std::uint8_t> in) {
    return decode_whole<Denunciation>(in, read_denunciation);
}
Block deserialize_block(std::span<const std::uint8_t> in) {
    return decode_whole<Block>(in, read_block);
}

}  // namespace nasdag
