#include "nasdag/scenario.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "nasdag/analysis.hpp"

namespace nasdag {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw ConfigError(path + ": " + what);
}

void check_keys(const YAML::Node& node, const std::string& path, const std::set<std::string>& allowed) {
    if (!node.IsMap()) fail(path.empty() ? "<root>" : path, "expected a mapping");
    for (const auto& kv : node) {
        const auto key = kv.first.as<std::string>();
        if (!allowed.count(key)) fail(path.empty() ? key : path + "." + key, "unknown key");
    }
}

std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
}

template <typename T>
void read(const YAML::Node& node, const std::string& path, const std::string& key, T& out) {
    const auto child = node[key];
    if (!child) return;
    try {
        out = child.as<T>();
    } catch (const YAML::Exception&) {
        fail(join(path, key), "invalid value '" + YAML::Dump(child) + "'");
    }
}

}  // namespace

Coins ScenarioConfig::adversary_stake() const {
    const auto beta_q = analysis::parse_rational(beta);
    if (beta_q <= 0) return 0;
    const auto honest = analysis::Rational(static_cast<long long>(honest_stake) * honest_nodes);
    const analysis::Rational x = honest * beta_q / (1 - beta_q);
    return static_cast<Coins>(boost::multiprecision::numerator(x) / boost::multiprecision::denominator(x));
}

void ScenarioConfig::validate() const {
    try {
        params.validate();
    } catch (const ConfigError& e) {
        throw ConfigError(std::string("protocol: ") + e.what());
    }
    if (periods == 0) throw ConfigError("periods: must be positive");
    if (eval_margin >= periods) throw ConfigError("eval_margin: must be below periods");
    if (honest_nodes == 0) throw ConfigError("nodes.honest: must be positive");
    if (honest_stake == 0) throw ConfigError("nodes.stake: must be positive");
    analysis::Rational b;
    try {
        b = analysis::parse_rational(beta);
    } catch (const std::exception&) {
        throw ConfigError("adversary.beta: not a rational number '" + beta + "'");
    }
    if (b < 0 || b >= 1) throw ConfigError("adversary.beta: must be in [0, 1)");
    if (b > 0 && adversary_stake() == 0) throw ConfigError("adversary.beta: too small for the honest stake");
    if (adversary.attack_until < adversary.attack_from)
        throw ConfigError("adversary.attack_until: must not precede attack_from");
    if ((adversary.strategy == Strategy::multi_staker || adversary.strategy == Strategy::flooder) &&
        adversary.versions == 0)
        throw ConfigError("adversary.versions: must be positive");
    if (network.base_delay < 0 || network.jitter < 0 || network.delta_max < 0)
        throw ConfigError("network: delays must be non-negative");
    for (std::size_t i = 0; i < partitions.size(); ++i) {
        const auto& p = partitions[i];
        const std::string path = "partitions[" + std::to_string(i) + "]";
        if (p.until < p.from) throw ConfigError(path + ".until: must not precede from");
        for (auto id : p.side)
            if (id >= honest_nodes) throw ConfigError(path + ".side: node id out of range");
    }
}

ScenarioConfig parse_scenario(const std::string& yaml_text) {
    YAML::Node root;
    try {
        root = YAML::Load(yaml_text);
    } catch (const YAML::Exception& e) {
        throw ConfigError(std::string("<root>: YAML syntax error: ") + e.what());
    }
    ScenarioConfig cfg;
    if (!root || root.IsNull()) throw ConfigError("<root>: empty document");
    check_keys(root, "",
               {"name", "seed", "periods", "eval_margin", "protocol", "economics", "nodes", "network",
                "adversary", "partitions", "workload"});
    read(root, "", "name", cfg.name);
    read(root, "", "seed", cfg.seed);
    read(root, "", "periods", cfg.periods);
    read(root, "", "eval_margin", cfg.eval_margin);

    if (auto p = root["protocol"]) {
        check_keys(p, "protocol",
                   {"threads", "t0_ms", "endorsers", "threshold", "delta_f", "max_block_bits", "clock_skew_ms",
                    "clique_cap", "epoch_length"});
        auto& pp = cfg.params;
        read(p, "protocol", "threads", pp.threads);
        read(p, "protocol", "t0_ms", pp.t0);
        read(p, "protocol", "endorsers", pp.endorsers);
        read(p, "protocol", "threshold", pp.threshold);
        read(p, "protocol", "delta_f", pp.delta_f);
        read(p, "protocol", "max_block_bits", pp.max_block_bits);
        read(p, "protocol", "clock_skew_ms", pp.clock_skew);
        read(p, "protocol", "clique_cap", pp.clique_cap);
        read(p, "protocol", "epoch_length", pp.epoch_length);
    }
    if (auto e = root["economics"]) {
        check_keys(e, "economics", {"block_reward", "endorsement_reward", "penalty", "deposit"});
        auto& ec = cfg.params.economics;
        read(e, "economics", "block_reward", ec.block_reward);
        read(e, "economics", "endorsement_reward", ec.endorsement_reward);
        read(e, "economics", "penalty", ec.penalty);
        read(e, "economics", "deposit", ec.deposit);
    }
    if (auto n = root["nodes"]) {
        check_keys(n, "nodes", {"honest", "stake"});
        read(n, "nodes", "honest", cfg.honest_nodes);
        read(n, "nodes", "stake", cfg.honest_stake);
    }
    if (auto n = root["network"]) {
        check_keys(n, "network", {"base_delay_ms", "jitter_ms", "delta_max_ms"});
        read(n, "network", "base_delay_ms", cfg.network.base_delay);
        read(n, "network", "jitter_ms", cfg.network.jitter);
        read(n, "network", "delta_max_ms", cfg.network.delta_max);
    }
    if (auto a = root["adversary"]) {
        check_keys(a, "adversary", {"strategy", "beta", "versions", "depth", "attack_from", "attack_until"});
        std::string strategy = to_string(cfg.adversary.strategy);
        read(a, "adversary", "strategy", strategy);
        auto s = parse_strategy(strategy);
        if (!s) fail("adversary.strategy", "unknown strategy '" + strategy + "'");
        cfg.adversary.strategy = *s;
        read(a, "adversary", "beta", cfg.beta);
        read(a, "adversary", "versions", cfg.adversary.versions);
        read(a, "adversary", "depth", cfg.adversary.depth);
        read(a, "adversary", "attack_from", cfg.adversary.attack_from);
        read(a, "adversary", "attack_until", cfg.adversary.attack_until);
    }
    if (auto ps = root["partitions"]) {
        if (!ps.IsSequence()) fail("partitions", "expected a sequence");
        for (std::size_t i = 0; i < ps.size(); ++i) {
            const std::string path = "partitions[" + std::to_string(i) + "]";
            check_keys(ps[i], path, {"from", "until", "side"});
            Partition p;
            read(ps[i], path, "from", p.from);
            read(ps[i], path, "until", p.until);
            read(ps[i], path, "side", p.side);
            cfg.partitions.push_back(std::move(p));
        }
    }
    if (auto w = root["workload"]) {
        check_keys(w, "workload", {"users_per_thread", "tx_per_period", "user_balance"});
        read(w, "workload", "users_per_thread", cfg.workload.users_per_thread);
        read(w, "workload", "tx_per_period", cfg.workload.tx_per_period);
        read(w, "workload", "user_balance", cfg.workload.user_balance);
    }
    cfg.validate();
    return cfg;
}

ScenarioConfig load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path + ": cannot open");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_scenario(ss.str());
}

std::string scenario_to_yaml(const ScenarioConfig& cfg) {
    YAML::Emitter y;
    y << YAML::BeginMap;
    y << YAML::Key << "name" << YAML::Value << cfg.name;
    y << YAML::Key << "seed" << YAML::Value << cfg.seed;
    y << YAML::Key << "periods" << YAML::Value << cfg.periods;
    y << YAML::Key << "eval_margin" << YAML::Value << cfg.eval_margin;
    const auto& p = cfg.params;
    y << YAML::Key << "protocol" << YAML::Value << YAML::BeginMap;
    y << YAML::Key << "threads" << YAML::Value << p.threads;
    y << YAML::Key << "t0_ms" << YAML::Value << p.t0;
    y << YAML::Key << "endorsers" << YAML::Value << p.endorsers;
    y << YAML::Key << "threshold" << YAML::Value << p.threshold;
    y << YAML::Key << "delta_f" << YAML::Value << p.delta_f;
    y << YAML::Key << "max_block_bits" << YAML::Value << p.max_block_bits;
    y << YAML::Key << "clock_skew_ms" << YAML::Value << p.clock_skew;
    y << YAML::Key << "clique_cap" << YAML::Value << p.clique_cap;
    y << YAML::Key << "epoch_length" << YAML::Value << p.epoch_length;
    y << YAML::EndMap;
    y << YAML::Key << "economics" << YAML::Value << YAML::BeginMap;
    y << YAML::Key << "block_reward" << YAML::Value << p.economics.block_reward;
    y << YAML::Key << "endorsement_reward" << YAML::Value << p.economics.endorsement_reward;
    y << YAML::Key << "penalty" << YAML::Value << p.economics.penalty;
    y << YAML::Key << "deposit" << YAML::Value << p.economics.deposit;
    y << YAML::EndMap;
    y << YAML::Key << "nodes" << YAML::Value << YAML::BeginMap;
    y << YAML::Key << "honest" << YAML::Value << cfg.honest_nodes;
    y << YAML::Key << "stake" << YAML::Value << cfg.honest_stake;
    y << YAML::EndMap;
    y << YAML::Key << "network" << YAML::Value << YAML::BeginMap;
    y << YAML::Key << "base_delay_ms" << YAML::Value << cfg.network.base_delay;
    y << YAML::Key << "jitter_ms" << YAML::Value << cfg.network.jitter;
    y << YAML::Key << "delta_max_ms" << YAML::Value << cfg.network.delta_max;
    y << YAML::EndMap;
    y << YAML::Key << "adversary" << YAML::Value << YAML::BeginMap;
    y << YAML::Key << "strategy" << YAML::Value << to_string(cfg.adversary.strategy);
    y << YAML::Key << "beta" << YAML::Value << cfg.beta;
    y << YAML::Key << "versions" << YAML::Value << cfg.adversary.versions;
    y << YAML::Key << "depth" << YAML::Value << cfg.adversary.depth;
    y << YAML::Key << "attack_from" << YAML::Value << cfg.adversary.attack_from;
    y << YAML::Key << "attack_until" << YAML::Value << cfg.adversary.attack_until;
    y << YAML::EndMap;
    if (!cfg.partitions.empty()) {
        y << YAML::Key << "partitions" << YAML::Value << YAML::BeginSeq;
        for (const auto& part : cfg.partitions) {
            y << YAML::BeginMap;
            y << YAML::Key << "from" << YAML::Value << part.from;
            y << YAML::Key << "until" << YAML::Value << part.until;
            y << YAML::Key << "side" << YAML::Value << YAML::Flow << part.side;
            y << YAML::EndMap;
        }
        y << YAML::EndSeq;
    }
    y << YAML::Key << "workload" << YAML::Value << YAML::BeginMap;
    y << YAML::Key << "users_per_thread" << YAML::Value << cfg.workload.users_per_thread;
    y << YAML::Key << "tx_per_period" << YAML::Value << cfg.workload.tx_per_period;
    y << YAML::Key << "user_balance" << YAML::Value << cfg.workload.user_balance;
    y << YAML::EndMap;
    y << YAML::EndMap;
    return std::string(y.c_str()) + "\n";
}

}  // namespace nasdag
