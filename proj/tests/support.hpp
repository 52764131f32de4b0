#pragma once

#include <map>
#include <memory>
#include <random>
#include <vector>

#include "nasdag/block_graph.hpp"
#include "nasdag/committee.hpp"
#include "nasdag/compat_graph.hpp"
#include "nasdag/crypto.hpp"
#include "nasdag/ledger.hpp"
#include "nasdag/messages.hpp"
#include "nasdag/validity.hpp"

namespace nasdag::test {

inline Digest test_seed(std::uint64_t n = 0) { return sha256("nasdag-test-seed:" + std::to_string(n)); }

template <class H>
H random_hash(std::mt19937_64& rng) {
    H h;
    for (auto& b : h.bytes) b = static_cast<std::uint8_t>(rng());
    return h;
}

/// Stakers with registered keys and a shared committee.
struct World {
    ProtocolParams params;
    KeyRegistry registry;
    std::vector<Signer> signers;
    std::shared_ptr<Committee> committee;

    explicit World(ProtocolParams p, std::size_t stakers = 4, std::uint64_t seed = 0) : params(p) {
        params.seed = test_seed(seed);
        std::map<Address, Coins> stakes;
        for (std::size_t i = 0; i < stakers; ++i) {
            const auto secret = derive_secret(params.seed, "staker", i);
            registry.add(secret);
            signers.emplace_back(secret);
            stakes[signers.back().address()] = 1000;
        }
        committee = std::make_shared<Committee>(std::make_shared<const StakeTable>(stakes, 0), params.seed,
                                                params.endorsers);
    }

    const Signer& signer_of(const Address& a) const {
        for (const auto& s : signers)
            if (s.address() == a) return s;
        throw std::logic_error("unknown staker");
    }
    const Signer& producer(const Slot& s) const { return signer_of(committee->producer(s)); }

    Endorsement endorse(const Slot& s, std::uint32_t index, const BlockId& block) const {
        return Endorsement::make(signer_of(committee->endorser(s, index)), s, index, block);
    }
    /// Certificate from the first n indices (all of them by default).
    Certificate certify(const Slot& s, const BlockId& block, std::uint32_t n = 0) const {
        Certificate c;
        c.slot = s;
        c.endorsed = block;
        const std::uint32_t count = n == 0 ? params.endorsers : n;
        for (std::uint32_t i = 0; i < count; ++i) c.endorsements.push_back(endorse(s, i, block));
        return c;
    }
    /// Signed block by the drawn producer.
    BlockPtr block(const Slot& s, std::vector<ParentRef> parents, std::vector<Certificate> certs = {},
                   std::vector<Operation> ops = {}) const {
        Block b;
        b.slot = s;
        b.parents = std::move(parents);
        b.certificates = std::move(certs);
        b.operations = std::move(ops);
        b.sign_with(producer(s));
        return make_block_ptr(std::move(b));
    }
};

inline std::vector<ParentRef> genesis_parents(std::uint32_t threads) {
    std::vector<ParentRef> ps;
    for (std::uint32_t t = 0; t < threads; ++t) ps.push_back(ParentRef{Block::genesis(t).id, Slot{t, 0}});
    return ps;
}

inline ParentRef pref(const BlockPtr& b) { return ParentRef{b->id, b->slot}; }

/// Unsigned block for graph-only fixtures; extra salts the id.
inline BlockPtr raw_block(const Slot& s, std::vector<ParentRef> parents, std::uint64_t extra = 0) {
    Block b;
    b.slot = s;
    b.parents = std::move(parents);
    if (extra != 0) b.producer.bytes[31] = static_cast<std::uint8_t>(extra);
    b.seal();
    return make_block_ptr(std::move(b));
}

/// G and G_C with genesis blocks inserted as active vertices.
struct Graphs {
    BlockGraph g;
    CompatGraph gc;
    std::uint32_t threads;

    Graphs(std::uint32_t t, TimeMs t0 = 16000) : g(t), gc(t, t0, 1024), threads(t) {
        for (std::uint32_t i = 0; i < t; ++i) add(make_block_ptr(Block::genesis(i)));
    }
    BlockPtr add(BlockPtr b) {
        g.append(b);
        gc.add_block(*b, g);
        return b;
    }
    CliqueReport report() const { return gc.report(g); }
};

}  // namespace nasdag::test
