#pragma once

#include <string>
#include <vector>

#include "nasdag/adversary.hpp"
#include "nasdag/types.hpp"

namespace nasdag {

struct NetworkParams {
    TimeMs base_delay = 200;
    TimeMs jitter = 300;
    TimeMs delta_max = 0;  // 0: t0 / 2

    TimeMs bound(TimeMs t0) const { return delta_max > 0 ? delta_max : t0 / 2; }
};

/// Honest nodes listed in side are cut off from the other honest nodes for
/// periods [from, until). The adversary is never partitioned.
struct Partition {
    std::uint64_t from = 0;
    std::uint64_t until = 0;
    std::vector<NodeId> side;
};

struct Workload {
    std::uint32_t users_per_thread = 2;
    std::uint32_t tx_per_period = 2;
    Coins user_balance = 1'000'000;
};

struct ScenarioConfig {
    std::string name = "unnamed";
    std::uint64_t seed = 1;
    std::uint64_t periods = 100;
    std::uint64_t eval_margin = 10;  // trailing periods excluded from the liveness ratio
    ProtocolParams params{};
    std::uint32_t honest_nodes = 4;
    Coins honest_stake = 1000;
    std::string beta = "0";  // adversary share of total stake
    AdversaryParams adversary{};
    NetworkParams network{};
    std::vector<Partition> partitions;
    Workload workload{};

    /// Throws ConfigError.
    void validate() const;
    std::uint64_t eval_periods() const { return periods > eval_margin ? periods - eval_margin : periods; }
    /// Adversary stake making its share exactly beta; 0 without an adversary.
    Coins adversary_stake() const;
};

/// Parses a YAML scenario. Unknown keys and bad values raise ConfigError
/// naming the key path.
ScenarioConfig parse_scenario(const std::string& yaml_text);
ScenarioConfig load_scenario(const std::string& path);
std::string scenario_to_yaml(const ScenarioConfig& cfg);

}  // namespace nasdag
