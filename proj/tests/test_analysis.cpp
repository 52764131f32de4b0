#include <gtest/gtest.h>

#include <cmath>
#include <functional>

#include "nasdag/analysis.hpp"

using namespace nasdag::analysis;

namespace {

/// Tail by long-double summation in log space.
long double float_tail(std::uint32_t e, std::uint32_t k, long double beta) {
    long double s = 0;
    for (std::uint32_t j = k; j <= e; ++j) {
        const long double lc = std::lgamma(static_cast<long double>(e) + 1) - std::lgamma(static_cast<long double>(j) + 1) -
                               std::lgamma(static_cast<long double>(e - j) + 1);
        s += std::exp(lc + j * std::log(beta) + (e - j) * std::log1p(-beta));
    }
    return s;
}

/// Most blocks that can each collect at least k of n single-use honest
/// endorsements, by exhaustive enumeration of allocations into parts.
int max_certified(int n, int k) {
    std::function<int(int, int)> go = [&](int left, int min_part) {
        int best = 0;
        for (int part = min_part; part <= left; ++part) best = std::max(best, 1 + go(left - part, part));
        return best;
    };
    return go(n, k);
}

}  // namespace

TEST(Binomial, TailAtZeroIsOne) {
    for (std::uint32_t e : {1u, 10u, 96u})
        for (const auto& b : {Rational(0), Rational(1, 3), Rational(1)}) EXPECT_EQ(binom_tail(e, 0, b), 1);
}

TEST(Binomial, TailAndCdfSumToOne) {
    for (std::uint32_t k = 1; k <= 40; ++k) EXPECT_EQ(binom_tail(40, k, Rational(2, 7)) + binom_cdf(40, k - 1, Rational(2, 7)), 1);
    EXPECT_EQ(binom_tail(4, 2, Rational(1, 2)), Rational(11, 16));
    EXPECT_EQ(binomial(96, 64), binomial(96, 32));
}

TEST(Binomial, HeadlineTailExactValue) {
    const Rational p = binom_tail(96, 64, Rational(1, 3));
    EXPECT_NEAR(to_double(p), 2.6472358637e-11, 1e-20);
    EXPECT_NEAR(static_cast<double>(float_tail(96, 64, 1.0L / 3)), to_double(p), 1e-20);
    EXPECT_EQ(to_scientific(p, 4), "2.6472e-11");
}

TEST(Binomial, MatchesFloatingOracle) {
    for (std::uint32_t e : {10u, 50u, 100u})
        for (std::uint32_t k = 0; k <= e; k += 7) {
            const double exact = to_double(binom_tail(e, k, Rational(1, 3)));
            EXPECT_NEAR(exact, static_cast<double>(float_tail(e, k, 1.0L / 3)), 1e-12 + 1e-9 * exact);
        }
}

TEST(Binomial, HundredEndorsersThirtyFourIndices) {
    EXPECT_NEAR(to_double(binom_tail(100, 34, Rational(1, 3))), 0.4811966953, 1e-9);
}

TEST(Binomial, DomainErrors) {
    EXPECT_THROW(binom_tail(10, 11, Rational(1, 2)), std::domain_error);
    EXPECT_THROW(binom_tail(10, 1, Rational(3, 2)), std::domain_error);
    EXPECT_THROW(binom_tail(10, 1, Rational(-1, 2)), std::domain_error);
}

TEST(Rationals, Parse) {
    EXPECT_EQ(parse_rational("1/3"), Rational(1, 3));
    EXPECT_EQ(parse_rational("0.25"), Rational(1, 4));
    EXPECT_EQ(parse_rational("2"), Rational(2));
    EXPECT_THROW(parse_rational("abc"), std::invalid_argument);
    EXPECT_THROW(parse_rational("1/0"), std::invalid_argument);
}

TEST(Quorum, CeilOfFraction) {
    EXPECT_EQ(quorum_size(96, Rational(2, 3)), 64u);
    EXPECT_EQ(quorum_size(100, Rational(2, 3)), 67u);
    EXPECT_EQ(quorum_size(10, Rational(0)), 0u);
    EXPECT_EQ(quorum_size(10, Rational(1)), 10u);
}

TEST(SafetyGrid, ZeroQuorumIsCertainAndImmediate) {
    const auto cells = safety_grid({16, 96}, {Rational(0), Rational(1, 2)}, Rational(1, 3), 2.0);
    for (const auto& c : cells) {
        if (c.q != 0) continue;
        EXPECT_EQ(c.probability, 1);
        EXPECT_EQ(c.years_between_events, 0.0);
        EXPECT_EQ(c.band, -1);
    }
}

TEST(SafetyGrid, HeadlineCellArithmetic) {
    const auto cells = safety_grid({96}, {Rational(64, 96)}, Rational(1, 3), 2.0);
    ASSERT_EQ(cells.size(), 1u);
    EXPECT_EQ(cells[0].k, 64u);
    const double p = to_double(binom_tail(96, 64, Rational(1, 3)));
    EXPECT_DOUBLE_EQ(cells[0].years_between_events, 1.0 / (p * 2 * 86400 * 365.25));
    EXPECT_NEAR(cells[0].years_between_events, 598.51, 0.01);
    EXPECT_EQ(cells[0].band, 2);
}

TEST(SafetyGrid, NoAttackerNeverSucceeds) {
    const auto cells = safety_grid({8, 32}, {Rational(0), Rational(1, 8), Rational(2, 3)}, Rational(0), 2.0);
    for (const auto& c : cells) {
        if (c.q == 0) continue;
        EXPECT_EQ(c.probability, 0);
        EXPECT_TRUE(std::isinf(c.years_between_events));
        EXPECT_EQ(c.band, 4);
    }
}

TEST(SafetyGrid, MonotoneInQuorum) {
    std::vector<Rational> qs;
    for (int i = 0; i <= 12; ++i) qs.emplace_back(i, 12);
    for (std::uint32_t e : {12u, 48u, 96u}) {
        const auto cells = safety_grid({e}, qs, Rational(1, 3), 2.0);
        for (std::size_t i = 1; i < cells.size(); ++i) {
            EXPECT_LE(cells[i].probability, cells[i - 1].probability);
            EXPECT_GE(cells[i].band, cells[i - 1].band);
        }
    }
}

TEST(SafetyGrid, CsvLayout) {
    const auto csv = grid_csv(safety_grid({96}, {Rational(0), Rational(2, 3)}, Rational(1, 3), 2.0));
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "E,Q,beta,probability,years_between_events,band");
    EXPECT_NE(csv.find("96,0.666667,0.333333,2.647236e-11,5.985127e+02,100y"), std::string::npos) << csv;
}

TEST(SecurityBand, Thresholds) {
    EXPECT_EQ(security_band(0.5), -1);
    EXPECT_EQ(security_band(1.0), 0);
    EXPECT_EQ(security_band(9.99), 0);
    EXPECT_EQ(security_band(10.0), 1);
    EXPECT_EQ(security_band(1e4), 4);
    EXPECT_EQ(security_band(1e9), 4);
    EXPECT_EQ(security_band(std::numeric_limits<double>::infinity()), 4);
    EXPECT_DOUBLE_EQ(years_between_events(Rational(1), 1.0), 1.0 / kSecondsPerYear);
}

TEST(Liveness, NoAttackerIsFullyLive) { EXPECT_EQ(liveness_parameter(100, 67, Rational(0)), 1); }

TEST(Liveness, RoundedAndExact) {
    // With p2 rounded to 1/2: 1 - (1/3 + 1/2 - 1/6) = 1/3.
    const Rational p1(1, 3), p2(1, 2);
    EXPECT_EQ(1 - (p1 + p2 - p1 * p2), Rational(1, 3));
    const double exact = to_double(liveness_parameter(100, 67, Rational(1, 3)));
    EXPECT_NEAR(exact, 0.3458688698, 1e-9);
    const double p2x = to_double(binom_tail(100, 34, Rational(1, 3)));
    EXPECT_NEAR(exact, (1 - 1.0 / 3) * (1 - p2x), 1e-12);
    EXPECT_THROW(liveness_parameter(100, 0, Rational(1, 3)), std::domain_error);
}

TEST(Lemma1, Examples) {
    EXPECT_EQ(lemma1_bound(64, 1), 66);
    EXPECT_EQ(lemma1_bound(10, 5), 4);
    EXPECT_EQ(lemma1_bound(7, 3), 4);
    EXPECT_EQ(lemma1_bound(0, 1), 2);
    EXPECT_THROW(lemma1_bound(10, 0), std::domain_error);
    EXPECT_THROW(lemma1_bound(10, -2), std::domain_error);
}

TEST(Lemma1, BoundsExhaustiveAllocation) {
    for (int n = 0; n <= 20; ++n)
        for (int k = 1; k <= 8; ++k) {
            const int best = max_certified(n, k);
            EXPECT_EQ(best, n / k) << n << ' ' << k;
            EXPECT_LE(best, lemma1_bound(n, k));
        }
}
