#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string_view>
#include <vector>

#include "nasdag/node.hpp"

namespace nasdag {

enum class Strategy { honest, withholder, multi_staker, flooder, fork_attacker, equivocating_endorser };

const char* to_string(Strategy s);
std::optional<Strategy> parse_strategy(std::string_view name);

struct AdversaryParams {
    Strategy strategy = Strategy::honest;
    std::uint32_t versions = 2;  // blocks per produced slot (multi_staker, flooder)
    std::uint32_t depth = 1;     // fork_attacker: certified steps behind the honest choice
    std::uint64_t attack_from = 0;
    std::uint64_t attack_until = UINT64_MAX;  // first period back to honest behaviour

    bool attacking(std::uint64_t period) const { return period >= attack_from && period < attack_until; }
};

/// Byzantine participant. Keeps an honest view through an inner node and
/// replaces its outputs with the strategy's while the attack window is open.
/// It may address peers individually and ignores first-in rules.
class Adversary : public Participant {
public:
    /// ground holds one signer per thread, used to make block variants distinct.
    Adversary(std::unique_ptr<Node> view, AdversaryParams params, std::vector<Signer> ground,
              std::vector<NodeId> peers);

    Outbox on_message(NodeId from, const Message& m, TimeMs now) override;
    Outbox on_tick(TimeMs now) override;

    Node& view() { return *view_; }
    const Node& view() const { return *view_; }
    const AdversaryParams& params() const { return params_; }
    const Address& address() const { return view_->address(); }

    /// Blocks this adversary signed, by slot.
    const std::map<Slot, std::vector<BlockPtr>>& produced() const { return produced_; }
    std::uint64_t equivocations() const { return equivocations_; }

private:
    std::uint64_t period_of(TimeMs now) const { return now < 0 ? 0 : static_cast<std::uint64_t>(now / view_->params().t0); }
    Outbox filter_view_output(Outbox out) const;
    void act_as_producer(const Slot& s, TimeMs now, Outbox& out);
    void act_as_endorser(const Slot& s, TimeMs now, Outbox& out);
    std::vector<BlockPtr> make_variants(const Slot& s, std::uint32_t count);
    void archive(const Message& m);
    /// Fork block built from archived bodies when the view has pruned the target.
    std::optional<Block> fork_from_archive(const Slot& s) const;

    std::unique_ptr<Node> view_;
    AdversaryParams params_;
    std::vector<Signer> ground_;
    std::vector<NodeId> peers_;
    std::map<Slot, std::vector<BlockPtr>> produced_;
    std::map<BlockId, BlockPtr> store_;
    std::map<Slot, BlockPtr> archive_;  // first honest body seen per slot (fork_attacker only)
    std::map<CertKey, Certificate> archived_certs_;
    std::uint64_t equivocations_ = 0;
};

}  // namespace nasdag
