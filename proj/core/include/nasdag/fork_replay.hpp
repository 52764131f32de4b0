#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nasdag/netsim.hpp"

namespace nasdag {

struct ForkReplayOptions {
    std::string beta = "1/3";
    std::uint64_t delta_f = 2;
    std::uint64_t seed = 11;
    std::uint32_t honest_nodes = 4;
    std::uint32_t endorsers = 8;
    std::uint32_t threshold = 6;
    std::uint64_t tail_periods = 8;  // run length after the attack slot
};

struct ForkFrame {
    int number = 0;
    TimeMs time = 0;
    std::vector<std::string> lines;
};

/// Outcome of the single-thread fork-attack fixture. b_i is the honest
/// block the attacker skips; the attack block re-uses b_{i-1} as parent.
struct ForkReplayResult {
    std::uint64_t seed = 0;
    std::uint64_t honest_period = 0;  // i
    std::uint64_t attack_period = 0;  // i + 1
    BlockId prev{};                   // b_{i-1}
    BlockId honest{};                 // b_i
    BlockId attack{};                 // b_{i+1}
    std::optional<BlockId> successor;  // honest block of period i + 2

    bool attack_parent_is_prev = false;
    bool attack_includes_prev_cert = false;
    bool branches_incompatible = false;
    bool attack_in_compat = false;     // false when node 0 rejected b_{i+1} on arrival
    std::string attack_rejection;      // rejection reason at node 0, if any
    bool speculative_cert_present = false;
    bool honest_final_early = false;  // b_i already final (and pruned from G_C) at frame 1
    std::int64_t honest_fitness = 0;
    std::int64_t attack_fitness = 0;
    std::int64_t fitness_lift = 0;  // honest_fitness - attack_fitness
    bool blockclique_has_honest = false;
    bool blockclique_has_attack = false;
    bool honest_endorsers_chose_honest = false;
    bool attack_certified = false;
    bool successor_extends_honest = false;
    std::size_t successor_certs_for_honest = 0;
    bool attack_stale_everywhere = false;
    bool attack_ever_final = false;
    bool honest_final_everywhere = false;

    std::optional<TimeMs> second_cert_time;
    std::optional<TimeMs> honest_final_time;
    std::optional<TimeMs> attack_stale_time;
    TimeMs t0 = 0;

    std::vector<ForkFrame> frames;
    std::vector<std::string> events;

    /// All three frames behaved as the attack analysis predicts.
    bool outcome_ok() const;
    /// Periods between the second certificate and finalization of b_i.
    std::optional<double> periods_to_final() const;
    std::string trace() const;
};

/// Finds the first seed-derived schedule where an honest producer at i is
/// followed by the attacker at i + 1 and honest endorsers alone can certify,
/// then replays it with the attack restricted to that slot.
ForkReplayResult replay_fork_attack(const ForkReplayOptions& opts = {});

}  // namespace nasdag
