#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace nasdag::analysis {

using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

/// Parses "1/3", "0.25" or "2" into an exact rational.
Rational parse_rational(const std::string& text);
double to_double(const Rational& r);
std::string to_scientific(const Rational& r, int digits = 6);

BigInt binomial(std::uint32_t n, std::uint32_t k);

/// P(Bin(E, beta) >= k), exact.
Rational binom_tail(std::uint32_t e, std::uint32_t k, const Rational& beta);
/// P(Bin(E, beta) <= k), exact.
Rational binom_cdf(std::uint32_t e, std::uint32_t k, const Rational& beta);

/// ceil(q * e) for a rational q in [0, 1].
std::uint32_t quorum_size(std::uint32_t e, const Rational& q);

struct GridCell {
    std::uint32_t e = 0;
    Rational q;
    std::uint32_t k = 0;
    Rational beta;
    Rational probability;
    double years_between_events = 0.0;  // +inf when probability is 0
    int band = 0;
};

inline constexpr double kSecondsPerYear = 365.25 * 86400.0;

/// Years between slots in which the attacker holds at least k indices.
double years_between_events(const Rational& probability, double slots_per_second);

/// Security level: floor(log10(years)) clamped to [-1, 4]; 4 means at most once
/// every 10^4 years.
int security_band(double years);
std::string band_label(int band);

std::vector<GridCell> safety_grid(const std::vector<std::uint32_t>& e_values,
                                  const std::vector<Rational>& q_values, const Rational& beta,
                                  double slots_per_second);
std::string grid_csv(const std::vector<GridCell>& cells);

/// 1 - (p1 + p2 - p1*p2) with p1 = beta and p2 = P(attacker holds more than E - threshold indices).
Rational liveness_parameter(std::uint32_t e, std::uint32_t threshold, const Rational& beta);

/// floor((n + 2k) / k); throws std::domain_error for k <= 0.
std::int64_t lemma1_bound(std::int64_t n, std::int64_t k);

}  // namespace nasdag::analysis
