#pragma once

#include "robustpi/errors.hpp"

#include <gmpxx.h>

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace robustpi {

/// Exact rational scalar. mpq_class keeps values canonical (lowest terms,
/// positive denominator) as long as every constructor path canonicalizes.
using Rational = mpq_class;
using Integer = mpz_class;

namespace detail {

inline bool is_integer_literal(std::string_view s) {
    if (s.empty())
        return false;
    std::size_t i = (s.front() == '-' || s.front() == '+') ? 1 : 0;
    if (i == s.size())
        return false;
    return std::all_of(s.begin() + static_cast<std::ptrdiff_t>(i), s.end(),
                       [](char c) { return c >= '0' && c <= '9'; });
}

inline Integer parse_integer(std::string_view s) {
    if (!is_integer_literal(s))
        throw ModelError("malformed integer literal '" + std::string(s) + "'");
    std::string digits(s.front() == '+' ? s.substr(1) : s);
    return Integer(digits, 10);
}

} // namespace detail

/**
 * Parses "num/den" (or a bare integer "num") into a canonical rational.
 * Throws ModelError on malformed text or a zero denominator.
 */
inline Rational parse_rational(std::string_view text) {
    const auto slash = text.find('/');
    if (slash == std::string_view::npos)
        return Rational(detail::parse_integer(text));
    const Integer num = detail::parse_integer(text.substr(0, slash));
    const std::string_view den_text = text.substr(slash + 1);
    if (!den_text.empty() && (den_text.front() == '-' || den_text.front() == '+'))
        throw ModelError("denominator must be an unsigned integer in '" + std::string(text) + "'");
    const Integer den = detail::parse_integer(den_text);
    if (den == 0)
        throw ModelError("zero denominator in '" + std::string(text) + "'");
    Rational q(num, den);
    q.canonicalize();
    return q;
}

/// Canonical "num/den" text; the denominator is always written, even when 1.
inline std::string to_string(const Rational& q) {
    return q.get_num().get_str() + "/" + q.get_den().get_str();
}

inline Rational pow(const Rational& base, unsigned long exponent) {
    Integer num, den;
    mpz_pow_ui(num.get_mpz_t(), base.get_num_mpz_t(), exponent);
    mpz_pow_ui(den.get_mpz_t(), base.get_den_mpz_t(), exponent);
    Rational q(num, den);
    q.canonicalize();
    return q;
}

inline Integer pow(const Integer& base, unsigned long exponent) {
    Integer r;
    mpz_pow_ui(r.get_mpz_t(), base.get_mpz_t(), exponent);
    return r;
}

inline Rational abs(const Rational& q) { return q < 0 ? Rational(-q) : q; }

/// max_i |a_i - b_i|; the vectors must have equal length.
inline Rational sup_distance(const std::vector<Rational>& a, const std::vector<Rational>& b) {
    Rational best = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        Rational d = abs(a[i] - b[i]);
        if (d > best)
            best = d;
    }
    return best;
}

/**
 * Smallest integer L >= 0 with base^L <= x, i.e. ceil(log_base x) for
 * 0 <= base < 1 and 0 < x < 1 (clamped at zero when x >= 1).
 */
inline std::size_t ceil_log(const Rational& base, const Rational& x) {
    if (base < 0 || base >= 1)
        throw ModelError("ceil_log: base must lie in [0,1)");
    if (x <= 0)
        throw ModelError("ceil_log: argument must be positive");
    std::size_t exponent = 0;
    Rational power = 1;
    while (power > x) {
        power *= base;
        ++exponent;
    }
    return exponent;
}

/// floor(log2 q) for q > 0, exact.
inline long floor_log2(const Rational& q) {
    if (q <= 0)
        throw ModelError("floor_log2 of non-positive value");
    const long num_bits = static_cast<long>(mpz_sizeinbase(q.get_num_mpz_t(), 2));
    const long den_bits = static_cast<long>(mpz_sizeinbase(q.get_den_mpz_t(), 2));
    long e = num_bits - den_bits;
    // 2^e <= q < 2^(e+2) at this point; settle the off-by-one exactly
    Rational probe = e >= 0 ? Rational(pow(Integer(2), static_cast<unsigned long>(e)))
                            : Rational(Integer(1), pow(Integer(2), static_cast<unsigned long>(-e)));
    if (probe > q)
        return e - 1;
    return e;
}

/// ceil(log2 n) for n >= 1.
inline std::size_t ceil_log2(std::size_t n) {
    std::size_t bits = 0;
    while ((std::size_t{1} << bits) < n)
        ++bits;
    return bits;
}

/**
 * Decimal rendering with round-half-even at `significant` digits, written
 * in plain positional notation with trailing zeros removed ("0.05", "-12.5").
 */
inline std::string to_decimal(const Rational& q, unsigned significant = 12) {
    if (q == 0)
        return "0";
    const bool negative = q < 0;
    const Rational a = abs(q);

    // e = floor(log10 a)
    long e = 0;
    Rational scale = 1;
    while (a >= scale * 10) {
        scale *= 10;
        ++e;
    }
    while (a < scale) {
        scale /= 10;
        --e;
    }

    const long shift = static_cast<long>(significant) - 1 - e;
    Rational scaled = a;
    if (shift >= 0)
        scaled *= pow(Rational(10), static_cast<unsigned long>(shift));
    else
        scaled /= pow(Rational(10), static_cast<unsigned long>(-shift));

    Integer digits;
    mpz_fdiv_q(digits.get_mpz_t(), scaled.get_num_mpz_t(), scaled.get_den_mpz_t());
    const Rational frac = scaled - Rational(digits);
    const Rational half(1, 2);
    if (frac > half || (frac == half && mpz_odd_p(digits.get_mpz_t())))
        digits += 1;

    long point = shift; // value = digits / 10^point
    std::string body = digits.get_str();
    if (point <= 0) {
        body.append(static_cast<std::size_t>(-point), '0');
    } else {
        if (body.size() <= static_cast<std::size_t>(point))
            body.insert(0, static_cast<std::size_t>(point) - body.size() + 1, '0');
        body.insert(body.size() - static_cast<std::size_t>(point), ".");
        while (body.back() == '0')
            body.pop_back();
        if (body.back() == '.')
            body.pop_back();
    }
    return negative ? "-" + body : body;
}

} // namespace robustpi
