#include "nasdag/types.hpp"

#include <bit>

namespace nasdag {

std::string Slot::str() const {
    return "(" + std::to_string(thread) + "," + std::to_string(period) + ")";
}

void ProtocolParams::validate() const {
    if (threads == 0 || !std::has_single_bit(threads))
        throw ConfigError("threads must be a power of two");
    if (threads > 256) throw ConfigError("threads must be at most 256");
    if (t0 <= 0 || t0 % threads != 0 || t0 % 2 != 0)
        throw ConfigError("t0 must be positive and divisible by threads and by 2");
    if (endorsers == 0) throw ConfigError("endorsers must be positive");
    if (threshold == 0 || threshold > endorsers)
        throw ConfigError("threshold must be in [1, endorsers]");
    if (clique_cap == 0) throw ConfigError("clique_cap must be positive");
    if (max_block_bits < 8 * 1024) throw ConfigError("max_block_bits too small");
    if (clock_skew < 0) throw ConfigError("clock_skew must be non-negative");
    if (epoch_length == 0) throw ConfigError("epoch_length must be positive");
    if (economics.endorsement_reward % 3 != 0)
        throw ConfigError("endorsement_reward must be divisible by 3");
}

Slot ProtocolParams::time_to_slot(TimeMs time) const {
    if (time < 0) time = 0;
    const TimeMs step = t0 / threads;
    const auto k = static_cast<std::uint64_t>(time / step);
    return Slot{static_cast<std::uint32_t>(k % threads), k / threads};
}

std::uint32_t ProtocolParams::thread_bits() const {
    return static_cast<std::uint32_t>(std::countr_zero(threads));
}

std::uint32_t ProtocolParams::shard_of(const Address& a) const {
    return nasdag::shard_of(a, threads);
}

std::uint32_t shard_of(const Address& a, std::uint32_t threads) {
    if (threads == 0 || !std::has_single_bit(threads))
        throw ConfigError("threads must be a power of two");
    const int bits = std::countr_zero(threads);
    if (bits == 0) return 0;
    const std::uint32_t lead = (static_cast<std::uint32_t>(a.bytes[0]) << 8) | a.bytes[1];
    return lead >> (16 - bits);
}

}  // namespace nasdag
