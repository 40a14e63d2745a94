#pragma once

#include "robustpi/errors.hpp"
#include "robustpi/model.hpp"
#include "robustpi/rational.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace robustpi {

/// floor(n^(1/p)) for n >= 1, p >= 1, by binary search on exact powers.
inline Integer integer_root_floor(const Integer& n, unsigned long p) {
    if (n < 1)
        throw ModelError("integer_root_floor: n must be >= 1");
    if (p < 1)
        throw ModelError("integer_root_floor: p must be >= 1");
    if (p == 1)
        return n;
    // 2^(ceil(bits/p)) is an upper bound for the root
    const std::size_t bits = mpz_sizeinbase(n.get_mpz_t(), 2);
    Integer lo = 1;
    Integer hi = pow(Integer(2), static_cast<unsigned long>((bits + p - 1) / p)) + 1;
    // invariant: lo^p <= n < hi^p
    while (hi - lo > 1) {
        Integer mid = (lo + hi) / 2;
        if (pow(mid, p) <= n)
            lo = mid;
        else
            hi = mid;
    }
    return lo;
}

struct Decomposition {
    Integer n;
    unsigned long p = 2;
    std::vector<Integer> terms; ///< sum of terms[i]^p equals n
};

/// Repeatedly subtract the largest p-th power not exceeding the remainder.
inline Decomposition greedy_power_decomposition(const Integer& n, unsigned long p) {
    if (n < 1)
        throw ModelError("greedy_power_decomposition: n must be >= 1");
    if (p < 2)
        throw ModelError("greedy_power_decomposition: p must be >= 2");
    Decomposition d;
    d.n = n;
    d.p = p;
    Integer rest = n;
    while (rest > 0) {
        Integer u = integer_root_floor(rest, p);
        rest -= pow(u, p);
        d.terms.push_back(u);
    }
    return d;
}

/**
 * Three-layer chain built from a root-sum instance (a, alpha, p, gamma).
 *
 * State 0 is s0; states 1..n are the transient s_i; transient s_i owns the
 * absorbing block starting at n + 1 + (i-1) 2M*: first the M* "+" states,
 * then the M* "-" states, in decomposition order (zero-padded).
 */
struct GadgetInstance {
    std::vector<Integer> a;
    Integer alpha;
    unsigned long p = 2;
    Rational discount;

    std::vector<Integer> b; ///< 2^p a_i
    std::vector<Integer> x; ///< b_i / 2
    Integer K;              ///< 2^(p-1) alpha
    std::vector<std::vector<Integer>> terms; ///< decomposition of x_i, padded to M*
    std::size_t m_star = 0;
    Rational delta;  ///< 1 / (2 M*)
    Rational lambda; ///< gamma^2 delta K / n

    Rmc chain;

    std::size_t transient(std::size_t i) const { return 1 + i; } ///< 0-based i
    std::size_t plus(std::size_t i, std::size_t k) const { return 1 + a.size() + i * 2 * m_star + k; }
    std::size_t minus(std::size_t i, std::size_t k) const { return plus(i, k) + m_star; }
};

inline GadgetInstance build_root_sum_gadget(const std::vector<Integer>& a, const Integer& alpha, unsigned long p,
                                            const Rational& discount) {
    if (a.empty())
        throw ModelError("gadget: need at least one a_i");
    for (const auto& ai : a)
        if (ai < 1)
            throw ModelError("gadget: every a_i must be a positive integer");
    if (p < 2)
        throw ModelError("gadget: p must be >= 2");
    if (sgn(discount) <= 0 || discount >= 1)
        throw ModelError("gadget: discount must lie in (0,1)");

    GadgetInstance g;
    g.a = a;
    g.alpha = alpha;
    g.p = p;
    g.discount = discount;
    const std::size_t n = a.size();
    const Integer two_p = pow(Integer(2), p);
    for (const auto& ai : a) {
        g.b.push_back(two_p * ai);
        g.x.push_back(g.b.back() / 2);
        g.terms.push_back(greedy_power_decomposition(g.x.back(), p).terms);
        g.m_star = std::max(g.m_star, g.terms.back().size());
    }
    for (auto& t : g.terms)
        t.resize(g.m_star, Integer(0));
    g.K = pow(Integer(2), p - 1) * alpha;
    g.delta = Rational(1, static_cast<long>(2 * g.m_star));
    g.lambda = discount * discount * g.delta * Rational(g.K) / Rational(static_cast<long>(n));

    const std::size_t total = 1 + n + n * 2 * g.m_star;
    Rmc& c = g.chain;
    c.discount = discount;
    c.cost.assign(total, Rational(0));
    c.rows.resize(total);

    Row& root = c.rows[0];
    for (std::size_t i = 0; i < n; ++i) {
        root.successors.push_back(g.transient(i));
        root.uncertainty.nominal.push_back(Rational(1, static_cast<long>(n)));
    }
    root.uncertainty.radius = 0;
    root.uncertainty.norm = Norm::lp(static_cast<unsigned>(p));

    const Rational keep = 1 - discount;
    for (std::size_t i = 0; i < n; ++i) {
        Row& mid = c.rows[g.transient(i)];
        for (std::size_t k = 0; k < g.m_star; ++k)
            mid.successors.push_back(g.plus(i, k));
        for (std::size_t k = 0; k < g.m_star; ++k)
            mid.successors.push_back(g.minus(i, k));
        mid.uncertainty.nominal.assign(2 * g.m_star, g.delta);
        mid.uncertainty.radius = g.delta;
        mid.uncertainty.norm = Norm::lp(static_cast<unsigned>(p));
        for (std::size_t k = 0; k < g.m_star; ++k) {
            const Rational level(pow(g.terms[i][k], p - 1));
            c.cost[g.plus(i, k)] = keep * level;
            c.cost[g.minus(i, k)] = -keep * level;
            for (std::size_t s : {g.plus(i, k), g.minus(i, k)}) {
                c.rows[s].successors = {s};
                c.rows[s].uncertainty.nominal = {Rational(1)};
                c.rows[s].uncertainty.radius = 0;
                c.rows[s].uncertainty.norm = Norm::lp(static_cast<unsigned>(p));
            }
        }
    }
    return g;
}

/// Closed interval [lo, hi]; exact when lo == hi.
struct RationalInterval {
    Rational lo, hi;
    bool exact() const { return lo == hi; }
};

/**
 * Encloses base^(num/p) between consecutive multiples of 2^-bits:
 * lo = floor(2^bits root) / 2^bits, hi = lo + 2^-bits unless the root is exact.
 * Raising bits gives nested intervals.
 */
inline RationalInterval root_enclosure(const Integer& base, unsigned long num, unsigned long p, unsigned long bits) {
    if (base < 1)
        throw ModelError("root_enclosure: base must be >= 1");
    const Integer scale = pow(Integer(2), bits);
    const Integer target = pow(base, num) * pow(scale, p);
    const Integer r = integer_root_floor(target, p);
    RationalInterval out;
    out.lo = Rational(r, scale);
    out.lo.canonicalize();
    out.hi = out.lo;
    if (pow(r, p) != target) {
        out.hi = Rational(r + 1, scale);
        out.hi.canonicalize();
    }
    return out;
}

/**
 * Enclosure of v(s0) = (gamma^2 delta / n) sum_i b_i^((p-1)/p). Each root is
 * enclosed to `precision` bits; since every b_i^((p-1)/p) >= 2 the relative
 * width stays below 2^-precision.
 */
inline RationalInterval gadget_closed_form_value(const GadgetInstance& g, unsigned long precision) {
    if (precision < 16)
        throw ModelError("precision must be at least 16 bits");
    Rational lo = 0, hi = 0;
    for (const auto& bi : g.b) {
        const auto r = root_enclosure(bi, g.p - 1, g.p, precision);
        lo += r.lo;
        hi += r.hi;
    }
    const Rational factor = g.discount * g.discount * g.delta / Rational(static_cast<long>(g.a.size()));
    return {factor * lo, factor * hi};
}

enum class Decision { True, False, Inconclusive };

inline const char* to_string(Decision d) {
    switch (d) {
    case Decision::True:
        return "true";
    case Decision::False:
        return "false";
    case Decision::Inconclusive:
        return "inconclusive";
    }
    return "?";
}

/// Is the quantity enclosed by `iv` at least `threshold`? Equality counts only when exact.
inline Decision compare_enclosure(const RationalInterval& iv, const Rational& threshold) {
    if (iv.exact())
        return iv.lo >= threshold ? Decision::True : Decision::False;
    // the true value lies strictly inside (lo, hi) or equals lo
    if (iv.lo >= threshold)
        return Decision::True;
    if (iv.hi <= threshold)
        return Decision::False;
    return Decision::Inconclusive;
}

/// Which power of a_i the root sum adds up.
enum class RootExponent {
    Gadget, ///< a_i^((p-1)/p), the form the gadget encodes
    Direct, ///< a_i^(1/p)
};

/**
 * Decides sum_i a_i^(e/p) >= alpha with outward-rounded rational enclosures.
 * Each non-exact root lies in [lo, hi) with lo a floor, so a sum enclosure
 * with hi <= alpha is a strict "no".
 */
inline Decision decide_root_sum(const std::vector<Integer>& a, const Integer& alpha, unsigned long p,
                                unsigned long precision, RootExponent mode = RootExponent::Gadget) {
    if (a.empty())
        throw ModelError("root sum: need at least one a_i");
    if (p < 2)
        throw ModelError("root sum: p must be >= 2");
    const unsigned long num = mode == RootExponent::Gadget ? p - 1 : 1;
    RationalInterval sum{Rational(0), Rational(0)};
    for (const auto& ai : a) {
        if (ai < 1)
            throw ModelError("root sum: every a_i must be a positive integer");
        const auto r = root_enclosure(ai, num, p, precision);
        sum.lo += r.lo;
        sum.hi += r.hi;
    }
    return compare_enclosure(sum, Rational(alpha));
}

/// v(s0) >= lambda, decided from the closed-form enclosure.
inline Decision decide_gadget(const GadgetInstance& g, unsigned long precision) {
    return compare_enclosure(gadget_closed_form_value(g, precision), g.lambda);
}

} // namespace robustpi
