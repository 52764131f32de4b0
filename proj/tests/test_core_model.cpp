#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>

#include "nasdag/serialize.hpp"
#include "support.hpp"

using namespace nasdag;
using namespace nasdag::test;

namespace {

Block random_block(std::mt19937_64& rng, const std::vector<Signer>& signers) {
    auto pick = [&]() -> const Signer& { return signers[rng() % signers.size()]; };
    Block b;
    const std::uint32_t threads = 1u << (rng() % 4);
    b.slot = Slot{static_cast<std::uint32_t>(rng() % threads), 1 + rng() % 1000};
    for (std::uint32_t t = 0; t < threads; ++t)
        b.parents.push_back(ParentRef{random_hash<BlockId>(rng), Slot{t, rng() % b.slot.period}});
    const auto ncert = rng() % 3;
    for (std::uint64_t c = 0; c < ncert; ++c) {
        Certificate cert;
        cert.slot = Slot{b.slot.thread, rng() % b.slot.period};
        cert.endorsed = random_hash<BlockId>(rng);
        const auto n = 1 + rng() % 5;
        for (std::uint64_t i = 0; i < n; ++i)
            cert.endorsements.push_back(
                Endorsement::make(pick(), cert.slot, static_cast<std::uint32_t>(i), cert.endorsed));
        b.certificates.push_back(cert);
    }
    const auto nops = rng() % 4;
    for (std::uint64_t o = 0; o < nops; ++o) {
        if (rng() % 2 == 0) {
            b.operations.emplace_back(Transaction::make(pick(), random_hash<Address>(rng), rng() % 1000,
                                                        rng() % 10, rng() % 5));
        } else {
            Denunciation d;
            d.kind = rng() % 2 == 0 ? Denunciation::Kind::double_block : Denunciation::Kind::double_endorsement;
            d.slot = Slot{0, rng() % 100};
            d.index = static_cast<std::uint32_t>(rng() % 8);
            d.offender = random_hash<Address>(rng);
            d.a = Evidence{random_hash<Digest>(rng), pick().sign(random_hash<Digest>(rng))};
            d.b = Evidence{random_hash<Digest>(rng), pick().sign(random_hash<Digest>(rng))};
            b.operations.emplace_back(d);
        }
    }
    b.sign_with(pick());
    return b;
}

std::vector<Signer> make_signers(std::size_t n) {
    std::vector<Signer> out;
    for (std::size_t i = 0; i < n; ++i) out.emplace_back(derive_secret(test_seed(), "s", i));
    return out;
}

}  // namespace

TEST(Serialization, IsDeterministic) {
    std::mt19937_64 rng(1);
    const auto signers = make_signers(3);
    const Block b = random_block(rng, signers);
    EXPECT_EQ(serialize(b), serialize(b));
    Block copy = b;
    copy.seal();
    EXPECT_EQ(copy.id, b.id);
}

TEST(Serialization, ParentHashChangesId) {
    std::mt19937_64 rng(2);
    const auto signers = make_signers(3);
    Block a = random_block(rng, signers);
    Block b = a;
    b.parents[0].id.bytes[5] ^= 1;
    b.seal();
    EXPECT_NE(serialize(a), serialize(b));
    EXPECT_NE(a.id, b.id);
}

TEST(Serialization, RandomBlocksRoundTrip) {
    std::mt19937_64 rng(3);
    const auto signers = make_signers(5);
    std::set<BlockId> ids;
    for (int i = 0; i < 500; ++i) {
        const Block b = random_block(rng, signers);
        const auto bytes = serialize(b);
        const Block back = deserialize_block(bytes);
        ASSERT_EQ(back, b);
        EXPECT_EQ(back.id, b.id);
        EXPECT_EQ(back.payload, b.payload);
        EXPECT_EQ(serialize(back), bytes);
        ids.insert(b.id);
    }
    EXPECT_EQ(ids.size(), 500u);
}

TEST(Serialization, OtherItemsRoundTrip) {
    std::mt19937_64 rng(4);
    const auto signers = make_signers(2);
    const auto tx = Transaction::make(signers[0], signers[1].address(), 55, 2, 7);
    EXPECT_EQ(deserialize_transaction(serialize(tx)), tx);
    const auto e = Endorsement::make(signers[1], Slot{1, 9}, 3, random_hash<BlockId>(rng));
    const auto e2 = deserialize_endorsement(serialize(e));
    EXPECT_EQ(e2, e);
    EXPECT_EQ(e2.payload, e.payload);
    Certificate c{Slot{1, 9}, e.endorsed, {e}};
    EXPECT_EQ(deserialize_certificate(serialize(c)), c);
    Denunciation d;
    d.slot = Slot{0, 4};
    d.offender = signers[0].address();
    d.a = Evidence{random_hash<Digest>(rng), signers[0].sign(random_hash<Digest>(rng))};
    d.b = Evidence{random_hash<Digest>(rng), signers[0].sign(random_hash<Digest>(rng))};
    EXPECT_EQ(deserialize_denunciation(serialize(d)), d);
}

TEST(Serialization, TruncatedAndTrailingInputRejected) {
    std::mt19937_64 rng(5);
    const auto signers = make_signers(3);
    for (int i = 0; i < 100; ++i) {
        auto bytes = serialize(random_block(rng, signers));
        auto cut = bytes;
        cut.resize(rng() % bytes.size());
        EXPECT_THROW(deserialize_block(cut), DecodeError);
        bytes.push_back(0);
        EXPECT_THROW(deserialize_block(bytes), DecodeError);
    }
}

TEST(Shard, FirstFiveBitsPickTheThread) {
    Address a{};
    a.bytes[0] = 0b00000111;
    EXPECT_EQ(shard_of(a, 32), 0u);
    a.bytes[0] = 0b11111000;
    EXPECT_EQ(shard_of(a, 32), 31u);
    a.bytes[0] = 0b00001000;
    EXPECT_EQ(shard_of(a, 32), 1u);
}

TEST(Shard, SingleThreadIsZero) {
    std::mt19937_64 rng(6);
    for (int i = 0; i < 100; ++i) EXPECT_EQ(shard_of(random_hash<Address>(rng), 1), 0u);
}

TEST(Shard, NonPowerOfTwoIsConfigError) {
    EXPECT_THROW(shard_of(Address{}, 3), ConfigError);
    EXPECT_THROW(shard_of(Address{}, 0), ConfigError);
}

TEST(Shard, UniformOverFourThreads) {
    std::mt19937_64 rng(7);
    constexpr int kN = 100000;
    std::array<int, 4> counts{};
    for (int i = 0; i < kN; ++i) ++counts[shard_of(address_of_secret(random_hash<Digest>(rng)), 4)];
    const double expected = kN / 4.0;
    const double sigma = std::sqrt(kN * 0.25 * 0.75);
    double chi2 = 0;
    for (int c : counts) {
        EXPECT_NEAR(c, expected, 3 * sigma);
        chi2 += (c - expected) * (c - expected) / expected;
    }
    // 3 degrees of freedom, p = 0.01 critical value.
    EXPECT_LT(chi2, 11.345);
}

TEST(Slots, TimeToSlotExamples) {
    ProtocolParams p;
    p.threads = 32;
    p.t0 = 16000;
    EXPECT_EQ(p.time_to_slot(0), (Slot{0, 0}));
    EXPECT_EQ(p.time_to_slot(500), (Slot{1, 0}));
    EXPECT_EQ(p.time_to_slot(16499), (Slot{0, 1}));
}

TEST(Slots, TimeToSlotInvertsSlotTime) {
    ProtocolParams p;
    p.threads = 4;
    p.t0 = 1000;
    // Brute force: the latest slot whose start is <= time.
    for (TimeMs t = 0; t < 5000; t += 7) {
        Slot best{};
        for (std::uint64_t per = 0; per < 6; ++per)
            for (std::uint32_t th = 0; th < 4; ++th)
                if (p.slot_time(Slot{th, per}) <= t && p.slot_time(best) <= p.slot_time(Slot{th, per}))
                    best = Slot{th, per};
        EXPECT_EQ(p.time_to_slot(t), best) << t;
    }
}

TEST(Slots, SlotTimeStrictlyMonotone) {
    ProtocolParams p;
    p.threads = 8;
    p.t0 = 16000;
    TimeMs last = -1;
    for (std::uint64_t per = 0; per < 20; ++per)
        for (std::uint32_t th = 0; th < 8; ++th) {
            const TimeMs t = p.slot_time(Slot{th, per});
            EXPECT_GT(t, last);
            last = t;
        }
}

TEST(Signatures, OnlyRegisteredSecretVerifies) {
    KeyRegistry reg;
    const auto s1 = derive_secret(test_seed(), "a", 0);
    const auto s2 = derive_secret(test_seed(), "a", 1);
    reg.add(s1);
    Signer a(s1), b(s2);
    const auto payload = sha256("payload");
    EXPECT_TRUE(reg.verify(a.sign(payload)));
    EXPECT_FALSE(reg.verify(b.sign(payload)));
    auto forged = b.sign(payload);
    forged.signer = a.address();
    EXPECT_FALSE(reg.verify(forged));
    auto altered = a.sign(payload);
    altered.payload = sha256("other");
    EXPECT_FALSE(reg.verify(altered));
}

TEST(Params, ValidateRejectsBadConstants) {
    ProtocolParams p;
    EXPECT_NO_THROW(p.validate());
    p.threads = 3;
    EXPECT_THROW(p.validate(), ConfigError);
    p = ProtocolParams{};
    p.threshold = p.endorsers + 1;
    EXPECT_THROW(p.validate(), ConfigError);
    p = ProtocolParams{};
    p.t0 = 16001;
    EXPECT_THROW(p.validate(), ConfigError);
}
