#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace nasdag {

/// Fixed 256-bit value. The tag keeps block ids, addresses and raw digests
/// apart at compile time.
template <class Tag>
struct Hash256 {
    std::array<std::uint8_t, 32> bytes{};

    std::string hex() const;
    static Hash256 from_hex(std::string_view hex);

    bool is_zero() const {
        for (auto b : bytes)
            if (b != 0) return false;
        return true;
    }

    /// First eight bytes read big-endian.
    std::uint64_t prefix64() const {
        std::uint64_t v = 0;
        for (std::size_t i = 0; i < 8; ++i) v = (v << 8) | bytes[i];
        return v;
    }

    auto operator<=>(const Hash256&) const = default;
    bool operator==(const Hash256&) const = default;
};

struct DigestTag {};
struct BlockIdTag {};
struct AddressTag {};

using Digest = Hash256<DigestTag>;
using BlockId = Hash256<BlockIdTag>;
using Address = Hash256<AddressTag>;

std::string to_hex(std::span<const std::uint8_t> data);
bool parse_hex(std::string_view hex, std::span<std::uint8_t> out);

template <class Tag>
std::string Hash256<Tag>::hex() const {
    return to_hex(bytes);
}

template <class Tag>
Hash256<Tag> Hash256<Tag>::from_hex(std::string_view hex) {
    Hash256 h;
    if (!parse_hex(hex, h.bytes)) throw std::invalid_argument("bad 256-bit hex string");
    return h;
}

template <class To, class From>
To retag(const Hash256<From>& h) {
    To out;
    out.bytes = h.bytes;
    return out;
}

Digest sha256(std::span<const std::uint8_t> data);
Digest sha256(std::string_view text);

/// Accumulating hasher; the digest is taken over the concatenation of all
/// updates.
class Sha256 {
public:
    Sha256() { buf_.reserve(128); }

    Sha256& update(std::span<const std::uint8_t> data) {
        buf_.insert(buf_.end(), data.begin(), data.end());
        return *this;
    }
    Sha256& update(std::string_view text) {
        buf_.insert(buf_.end(), text.begin(), text.end());
        return *this;
    }
    template <class Tag>
    Sha256& update(const Hash256<Tag>& h) {
        return update(std::span<const std::uint8_t>(h.bytes));
    }
    Sha256& update_u8(std::uint8_t v) {
        buf_.push_back(v);
        return *this;
    }
    Sha256& update_u32(std::uint32_t v);
    Sha256& update_u64(std::uint64_t v);
    Digest finish() const { return sha256(buf_); }

private:
    std::vector<std::uint8_t> buf_;
};

}  // namespace nasdag

template <class Tag>
struct std::hash<nasdag::Hash256<Tag>> {
    std::size_t operator()(const nasdag::Hash256<Tag>& h) const noexcept {
        std::size_t v;
        std::memcpy(&v, h.bytes.data(), sizeof(v));
        return v;
    }
};
