#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "nasdag/messages.hpp"

namespace nasdag {

using Bytes = std::vector<std::uint8_t>;

class DecodeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class Writer {
public:
    void u8(std::uint8_t v) { out_.push_back(v); }
    void u32(std::uint32_t v);
    void u64(std::uint64_t v);
    template <class Tag>
    void hash(const Hash256<Tag>& h) {
        out_.insert(out_.end(), h.bytes.begin(), h.bytes.end());
    }
    void slot(const Slot& s) {
        u32(s.thread);
        u64(s.period);
    }
    void signature(const ModeledSignature& s) {
        hash(s.signer);
        hash(s.payload);
        hash(s.tag);
    }

    Bytes& bytes() { return out_; }
    Bytes take() { return std::move(out_); }

private:
    Bytes out_;
};

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}

    std::uint8_t u8();
    std::uint32_t u32();
    std::uint64_t u64();
    template <class Tag>
    Hash256<Tag> hash() {
        need(32);
        Hash256<Tag> h;
        std::copy(in_.begin() + pos_, in_.begin() + pos_ + 32, h.bytes.begin());
        pos_ += 32;
        return h;
    }
    Slot slot();
    ModeledSignature signature();
    /// Element count, rejected if it cannot possibly fit in the rest of the input.
    std::uint32_t count(std::size_t min_element_size);

    bool done() const { return pos_ == in_.size(); }
    void expect_done() const;

private:
    void need(std::size_t n) const;
    std::span<const std::uint8_t> in_;
    std::size_t pos_ = 0;
};

// Type tags leading each encoded item.
inline constexpr std::uint8_t kTagTransaction = 0x01;
inline constexpr std::uint8_t kTagEndorsement = 0x02;
inline constexpr std::uint8_t kTagBlock = 0x03;
inline constexpr std::uint8_t kTagCertificate = 0x04;
inline constexpr std::uint8_t kTagDenunciation = 0x05;

void write(Writer& w, const Transaction& tx, bool with_signature = true);
void write(Writer& w, const Endorsement& e, bool with_signature = true);
void write(Writer& w, const Certificate& c);
void write(Writer& w, const Denunciation& d);
void write(Writer& w, const Block& b, bool with_signature = true);

Transaction read_transaction(Reader& r);
Endorsement read_endorsement(Reader& r);
Certificate read_certificate(Reader& r);
Denunciation read_denunciation(Reader& r);
Block read_block(Reader& r);

template <class T>
Bytes serialize(const T& item) {
    Writer w;
    write(w, item);
    return w.take();
}

Transaction deserialize_transaction(std::span<const std::uint8_t> in);
Endorsement deserialize_endorsement(std::span<const std::uint8_t> in);
Certificate deserialize_certificate(std::span<const std::uint8_t> in);
Denunciation deserialize_denunciation(std::span<const std::uint8_t> in);
Block deserialize_block(std::span<const std::uint8_t> in);

}  // namespace nasdag
