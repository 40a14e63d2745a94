#pragma once

// Helpers shared by the unit tests: literal rationals and small random models.

#include "robustpi/model.hpp"
#include "robustpi/oracles.hpp"
#include "robustpi/rational.hpp"

#include <algorithm>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace rtest {

using robustpi::Rational;

inline Rational Q(const char* text) { return robustpi::parse_rational(text); }

inline std::vector<Rational> Qs(std::initializer_list<const char*> items) {
    std::vector<Rational> out;
    for (auto t : items)
        out.push_back(Q(t));
    return out;
}

/// Random distribution of length d from small integer weights (zeros allowed).
inline std::vector<Rational> random_distribution(std::mt19937_64& rng, std::size_t d) {
    std::uniform_int_distribution<long> pick(0, 4);
    std::vector<long> w(d);
    long total = 0;
    for (auto& x : w) {
        x = pick(rng);
        total += x;
    }
    if (total == 0) {
        w[0] = 1;
        total = 1;
    }
    std::vector<Rational> out;
    for (auto x : w) {
        Rational q(x, total);
        q.canonicalize();
        out.push_back(q);
    }
    return out;
}

inline Rational random_rational(std::mt19937_64& rng, long lo, long hi, long den) {
    std::uniform_int_distribution<long> num(lo * den, hi * den);
    Rational q(num(rng), den);
    q.canonicalize();
    return q;
}

/// Random valid RMDP with dense-ish successor lists; norm chosen by caller.
inline robustpi::Rmdp random_rmdp(std::mt19937_64& rng, std::size_t n, std::size_t m, const Rational& gamma,
                                  const Rational& radius, robustpi::Norm norm, std::size_t max_succ = 3) {
    robustpi::Rmdp model;
    model.n_actions = m;
    model.discount = gamma;
    for (std::size_t s = 0; s < n; ++s)
        model.cost.push_back(random_rational(rng, -2, 2, 4));
    std::uniform_int_distribution<std::size_t> count(1, std::min(max_succ, n));
    for (std::size_t s = 0; s < n; ++s) {
        for (std::size_t a = 0; a < m; ++a) {
            std::vector<std::size_t> all(n);
            for (std::size_t i = 0; i < n; ++i)
                all[i] = i;
            std::shuffle(all.begin(), all.end(), rng);
            robustpi::Row row;
            row.successors.assign(all.begin(), all.begin() + static_cast<long>(count(rng)));
            std::sort(row.successors.begin(), row.successors.end());
            row.uncertainty.nominal = random_distribution(rng, row.successors.size());
            row.uncertainty.radius = radius;
            row.uncertainty.norm = norm;
            model.rows.push_back(row);
        }
    }
    return model;
}

inline robustpi::Rmc random_rmc(std::mt19937_64& rng, std::size_t n, const Rational& gamma, const Rational& radius,
                                robustpi::Norm norm, std::size_t max_succ = 3) {
    auto model = random_rmdp(rng, n, 1, gamma, radius, norm, max_succ);
    robustpi::Rmc chain;
    chain.discount = model.discount;
    chain.cost = model.cost;
    chain.rows = model.rows;
    return chain;
}

/// Random feasible adversary: a point on the segment from the nominal to the
/// worst case against random values. Feasible by convexity of the ball.
inline robustpi::AdversaryPolicy random_feasible_adversary(std::mt19937_64& rng,
                                                           const std::vector<robustpi::Row>& rows) {
    std::uniform_int_distribution<long> step(0, 4);
    robustpi::AdversaryPolicy out;
    for (const auto& row : rows) {
        robustpi::ValueVector values(rows.size());
        for (auto& v : values)
            v = random_rational(rng, -3, 3, 2);
        const auto vertex = robustpi::worst_case(row, values).p;
        Rational mix(step(rng), 4);
        mix.canonicalize();
        robustpi::Distribution p;
        for (std::size_t i = 0; i < vertex.size(); ++i)
            p.push_back(Rational(row.uncertainty.nominal[i] + mix * (vertex[i] - row.uncertainty.nominal[i])));
        out.push_back(p);
    }
    return out;
}

} // namespace rtest
