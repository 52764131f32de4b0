#include "nasdag/analysis.hpp"

#include <cctype>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <boost/multiprecision/cpp_dec_float.hpp>

namespace nasdag::analysis {

using Decimal = boost::multiprecision::cpp_dec_float_50;

static BigInt parse_decimal_int(const std::string& digits, const std::string& text) {
    std::size_t i = 0;
    const bool negative = !digits.empty() && digits[0] == '-';
    if (negative) i = 1;
    if (i == digits.size()) throw std::invalid_argument("bad number '" + text + "'");
    BigInt v = 0;
    for (; i < digits.size(); ++i) {
        if (!std::isdigit(static_cast<unsigned char>(digits[i])))
            throw std::invalid_argument("bad number '" + text + "'");
        v = v * 10 + (digits[i] - '0');
    }
    return negative ? BigInt(-v) : v;
}

Rational parse_rational(const std::string& text) {
    if (text.empty()) throw std::invalid_argument("empty number");
    if (auto slash = text.find('/'); slash != std::string::npos) {
        BigInt num = parse_decimal_int(text.substr(0, slash), text);
        BigInt den = parse_decimal_int(text.substr(slash + 1), text);
        if (den == 0) throw std::invalid_argument("zero denominator in '" + text + "'");
        return Rational(num, den);
    }
    auto dot = text.find('.');
    if (dot == std::string::npos) return Rational(parse_decimal_int(text, text));
    BigInt den = 1;
    for (std::size_t i = dot + 1; i < text.size(); ++i) den *= 10;
    return Rational(parse_decimal_int(text.substr(0, dot) + text.substr(dot + 1), text), den);
}

double to_double(const Rational& r) {
    return static_cast<double>(Decimal(numerator(r)) / Decimal(denominator(r)));
}

std::string to_scientific(const Rational& r, int digits) {
    Decimal d = Decimal(numerator(r)) / Decimal(denominator(r));
    std::ostringstream os;
    os << std::scientific << std::setprecision(digits) << d;
    return os.str();
}

BigInt binomial(std::uint32_t n, std::uint32_t k) {
    if (k > n) return 0;
    if (k > n - k) k = n - k;
    BigInt c = 1;
    for (std::uint32_t i = 1; i <= k; ++i) c = c * (n - k + i) / i;
    return c;
}

static void check_domain(std::uint32_t k, std::uint32_t e, const Rational& beta) {
    if (k > e) throw std::domain_error("k must be in [0, E]");
    if (beta < 0 || beta > 1) throw std::domain_error("beta must be in [0, 1]");
}

static Rational binom_sum(std::uint32_t e, std::uint32_t lo, std::uint32_t hi, const Rational& beta) {
    // Common denominator: beta = a/b, so each term is C(e,j) a^j (b-a)^(e-j) / b^e.
    const BigInt a = numerator(beta);
    const BigInt b = denominator(beta);
    const BigInt c = b - a;
    BigInt total = 0;
    for (std::uint32_t j = lo; j <= hi; ++j) {
        BigInt term = binomial(e, j);
        term *= boost::multiprecision::pow(a, j);
        term *= boost::multiprecision::pow(c, e - j);
        total += term;
    }
    return Rational(total, boost::multiprecision::pow(b, e));
}

Rational binom_tail(std::uint32_t e, std::uint32_t k, const Rational& beta) {
    check_domain(k, e, beta);
    if (k == 0) return 1;
    return binom_sum(e, k, e, beta);
}

Rational binom_cdf(std::uint32_t e, std::uint32_t k, const Rational& beta) {
    check_domain(std::min(k, e), e, beta);
    if (k >= e) return 1;
    return binom_sum(e, 0, k, beta);
}

std::uint32_t quorum_size(std::uint32_t e, const Rational& q) {
    if (q < 0 || q > 1) throw std::domain_error("Q must be in [0, 1]");
    Rational x = q * e;
    BigInt num = numerator(x);
    BigInt den = denominator(x);
    BigInt k = num / den;
    if (k * den != num) k += 1;
    return static_cast<std::uint32_t>(k);
}

double years_between_events(const Rational& probability, double slots_per_second) {
    const double p = to_double(probability);
    if (p <= 0.0) return std::numeric_limits<double>::infinity();
    return 1.0 / (p * slots_per_second * kSecondsPerYear);
}

int security_band(double years) {
    if (std::isinf(years)) return 4;
    if (years < 1.0) return -1;
    int b = static_cast<int>(std::floor(std::log10(years)));
    return std::min(b, 4);
}

std::string band_label(int band) {
    switch (band) {
        case -1: return "below 1y";
        case 0: return "1y";
        case 1: return "10y";
        case 2: return "100y";
        case 3: return "1000y";
        default: return "10000y+";
    }
}

std::vector<GridCell> safety_grid(const std::vector<std::uint32_t>& e_values,
                                  const std::vector<Rational>& q_values, const Rational& beta,
                                  double slots_per_second) {
    std::vector<GridCell> cells;
    for (auto e : e_values) {
        for (const auto& q : q_values) {
            GridCell c;
            c.e = e;
            c.q = q;
            c.beta = beta;
            c.k = quorum_size(e, q);
            c.probability = binom_tail(e, c.k, beta);
            c.years_between_events = c.k == 0 ? 0.0 : years_between_events(c.probability, slots_per_second);
            c.band = security_band(c.years_between_events);
            cells.push_back(std::move(c));
        }
    }
    return cells;
}

std::string grid_csv(const std::vector<GridCell>& cells) {
    std::ostringstream os;
    os << "E,Q,beta,probability,years_between_events,band\n";
    for (const auto& c : cells) {
        os << c.e << ',' << std::setprecision(6) << to_double(c.q) << ',' << to_double(c.beta) << ','
           << to_scientific(c.probability, 6) << ',';
        if (std::isinf(c.years_between_events))
            os << "inf";
        else
            os << std::scientific << std::setprecision(6) << c.years_between_events << std::defaultfloat;
        os << ',' << band_label(c.band) << '\n';
    }
    return os.str();
}

Rational liveness_parameter(std::uint32_t e, std::uint32_t threshold, const Rational& beta) {
    if (threshold == 0 || threshold > e) throw std::domain_error("threshold must be in [1, E]");
    const Rational p1 = beta;
    const Rational p2 = binom_tail(e, e - threshold + 1, beta);
    return 1 - (p1 + p2 - p1 * p2);
}

std::int64_t lemma1_bound(std::int64_t n, std::int64_t k) {
    if (k <= 0) throw std::domain_error("lemma1_bound requires k >= 1");
    if (n < 0) throw std::domain_error("lemma1_bound requires n >= 0");
    return (n + 2 * k) / k;
}

}  // namespace nasdag::analysis
