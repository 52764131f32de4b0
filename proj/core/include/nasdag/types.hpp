#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>

#include "nasdag/hash.hpp"

namespace nasdag {

using TimeMs = std::int64_t;
using Coins = std::uint64_t;

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A (thread, period) position. Ordered by slot time, i.e. period first.
struct Slot {
    std::uint32_t thread = 0;
    std::uint64_t period = 0;

    friend constexpr std::strong_ordering operator<=>(const Slot& a, const Slot& b) {
        if (auto c = a.period <=> b.period; c != 0) return c;
        return a.thread <=> b.thread;
    }
    friend constexpr bool operator==(const Slot&, const Slot&) = default;

    std::string str() const;
};

struct Economics {
    Coins block_reward = 30'000;
    Coins endorsement_reward = 300;
    Coins penalty = 100'000;
    Coins deposit = 100'000;
};

struct ProtocolParams {
    std::uint32_t threads = 2;
    TimeMs t0 = 16'000;
    std::uint32_t endorsers = 8;
    std::uint32_t threshold = 6;
    std::uint64_t delta_f = 2;
    std::uint64_t max_block_bits = 1'000'000;
    TimeMs clock_skew = 100;
    std::size_t clique_cap = 1024;
    std::uint64_t epoch_length = 128;
    Digest seed{};
    Economics economics{};

    /// Throws ConfigError on inconsistent constants.
    void validate() const;

    TimeMs slot_time(const Slot& s) const {
        return static_cast<TimeMs>(s.period) * t0 + static_cast<TimeMs>(s.thread) * (t0 / threads);
    }
    Slot time_to_slot(TimeMs time) const;
    std::uint32_t shard_of(const Address& a) const;
    TimeMs request_expiry() const { return 8 * t0; }
    std::uint32_t thread_bits() const;
};

/// Thread of an address: its leading log2(T) bits. T must be a power of two.
std::uint32_t shard_of(const Address& a, std::uint32_t threads);

}  // namespace nasdag

template <>
struct std::hash<nasdag::Slot> {
    std::size_t operator()(const nasdag::Slot& s) const noexcept {
        return std::hash<std::uint64_t>()((s.period << 8) ^ s.thread);
    }
};
