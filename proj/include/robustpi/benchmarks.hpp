#pragma once

#include "robustpi/errors.hpp"
#include "robustpi/model.hpp"
#include "robustpi/rational.hpp"

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace robustpi {

/**
 * SplitMix64 (Steele, Lea, Flood 2014). State advances by 0x9E3779B97F4A7C15;
 * output mixes with multipliers 0xBF58476D1CE4E5B9 and 0x94D049BB133111EB
 * and shifts 30, 27, 31.
 */
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform integer in [lo, hi]: draws below 2^64 mod range are rejected, then x mod range.
    std::uint64_t uniform(std::uint64_t lo, std::uint64_t hi) {
        const std::uint64_t range = hi - lo + 1;
        if (range == 0)
            return next();
        const std::uint64_t threshold = (0 - range) % range;
        std::uint64_t x = next();
        while (x < threshold)
            x = next();
        return lo + x % range;
    }

private:
    std::uint64_t state_;
};

namespace detail {

inline Row make_row(const std::map<std::size_t, Rational>& mass) {
    Row row;
    for (const auto& [t, p] : mass) {
        if (sgn(p) == 0)
            continue;
        row.successors.push_back(t);
        row.uncertainty.nominal.push_back(p);
    }
    return row;
}

inline Row self_loop(std::size_t s) { return make_row({{s, Rational(1)}}); }

inline Rational frac(long num, long den) {
    Rational q(num, den);
    q.canonicalize();
    return q;
}

} // namespace detail

/**
 * k x k grid, state y*k + x. Actions 0..3 = up (y-1), right (x+1), down (y+1),
 * left (x-1); the intended move happens w.p. 8/10 and each perpendicular
 * slip w.p. 1/10. Moves off the grid stay put. Goal (k-1,k-1) and trap
 * (x, k-1-x) with x = floor((k-1)/2) are absorbing with costs -1 and +1;
 * every other state costs 1/100 per step.
 */
inline Rmdp gridworld(std::size_t k, const Rational& discount = Rational(1, 2)) {
    if (k < 2)
        throw ModelError("gridworld needs side length k >= 2");
    const std::size_t n = k * k;
    const std::size_t goal = (k - 1) * k + (k - 1);
    const std::size_t trap_x = (k - 1) / 2;
    const std::size_t trap = (k - 1 - trap_x) * k + trap_x;

    Rmdp model;
    model.n_actions = 4;
    model.discount = discount;
    model.cost.assign(n, detail::frac(1, 100));
    model.cost[goal] = -1;
    model.cost[trap] = 1;

    const int dx[4] = {0, 1, 0, -1};
    const int dy[4] = {-1, 0, 1, 0};
    auto step = [&](std::size_t s, int dir) {
        const long x = static_cast<long>(s % k) + dx[dir];
        const long y = static_cast<long>(s / k) + dy[dir];
        if (x < 0 || y < 0 || x >= static_cast<long>(k) || y >= static_cast<long>(k))
            return s;
        return static_cast<std::size_t>(y) * k + static_cast<std::size_t>(x);
    };
    for (std::size_t s = 0; s < n; ++s) {
        for (int a = 0; a < 4; ++a) {
            if (s == goal || s == trap) {
                model.rows.push_back(detail::self_loop(s));
                continue;
            }
            std::map<std::size_t, Rational> mass;
            mass[step(s, a)] += detail::frac(8, 10);
            mass[step(s, (a + 1) % 4)] += detail::frac(1, 10);
            mass[step(s, (a + 3) % 4)] += detail::frac(1, 10);
            model.rows.push_back(detail::make_row(mass));
        }
    }
    return model;
}

/// Round half to even for a non-negative rational.
inline std::size_t round_half_even(const Rational& x) {
    Integer fl;
    mpz_fdiv_q(fl.get_mpz_t(), x.get_num_mpz_t(), x.get_den_mpz_t());
    const Rational rest = x - Rational(fl);
    if (rest > Rational(1, 2) || (rest == Rational(1, 2) && mpz_odd_p(fl.get_mpz_t())))
        fl += 1;
    return fl.get_ui();
}

/// Triangular demand weights on {0..d_max}, peak m = floor(d_max/2), normalized.
inline std::vector<Rational> inventory_demand(std::size_t n) {
    const long d_max = std::max(1L, static_cast<long>(n - 1) / 2);
    const long m = d_max / 2;
    std::vector<long> w;
    long total = 0;
    for (long d = 0; d <= d_max; ++d) {
        const long x = std::max(0L, m - std::labs(d - m) + 1);
        w.push_back(x);
        total += x;
    }
    std::vector<Rational> out;
    for (auto x : w)
        out.push_back(detail::frac(x, total));
    return out;
}

/**
 * Inventory levels 0..n-1. Ordering q raises stock to y = min(s + q, n - 1),
 * demand d sells min(y, d), the rest carries over. Profit per step: sales
 * minus 1/10 per unit left over minus 1/2 per unit actually ordered (y - s).
 * Costs are the negated expected profit, attached per (state, action).
 * Actions order 0, round_half_even(d_max / 2), d_max units.
 */
inline Rmdp inventory(std::size_t n, const Rational& discount = Rational(1, 2)) {
    if (n < 2)
        throw ModelError("inventory needs n >= 2 states");
    const std::vector<Rational> demand = inventory_demand(n);
    const std::size_t d_max = demand.size() - 1;
    const std::size_t orders[3] = {0, round_half_even(Rational(static_cast<long>(d_max), 2L)), d_max};

    Rmdp model;
    model.n_actions = 3;
    model.discount = discount;
    model.cost.assign(n, Rational(0));
    for (std::size_t s = 0; s < n; ++s) {
        for (std::size_t q : orders) {
            const std::size_t y = std::min(s + q, n - 1);
            std::map<std::size_t, Rational> mass;
            Rational profit = -detail::frac(static_cast<long>(y - s), 2);
            for (std::size_t d = 0; d <= d_max; ++d) {
                if (sgn(demand[d]) == 0)
                    continue;
                const std::size_t sold = std::min(y, d);
                const std::size_t left = y - sold;
                mass[left] += demand[d];
                profit += demand[d] * (Rational(static_cast<long>(sold)) - detail::frac(static_cast<long>(left), 10));
            }
            model.rows.push_back(detail::make_row(mass));
            model.action_cost.push_back(-profit);
        }
    }
    return model;
}

/**
 * Degradation levels 0..n-1; actions operate, repair, replace.
 * operate: stay w.p. 2/3, degrade to s+1 w.p. 1/3, reward (n-1-s)/(n-1).
 * repair: improve to s-1 w.p. 3/4 (at s = 0 it stays), reward -1/4.
 * replace: reset to 0, reward -1/2. Level n-1 is absorbing under every action
 * but keeps the action rewards. Costs are negated rewards.
 */
inline Rmdp machine_replacement(std::size_t n, const Rational& discount = Rational(1, 2)) {
    if (n < 2)
        throw ModelError("machine replacement needs n >= 2 states");
    Rmdp model;
    model.n_actions = 3;
    model.discount = discount;
    model.cost.assign(n, Rational(0));
    const long top = static_cast<long>(n - 1);
    for (std::size_t s = 0; s < n; ++s) {
        const bool broken = s == n - 1;
        // operate
        if (broken)
            model.rows.push_back(detail::self_loop(s));
        else
            model.rows.push_back(detail::make_row({{s, detail::frac(2, 3)}, {s + 1, detail::frac(1, 3)}}));
        model.action_cost.push_back(-detail::frac(top - static_cast<long>(s), top));
        // repair
        if (broken || s == 0)
            model.rows.push_back(detail::self_loop(s));
        else
            model.rows.push_back(detail::make_row({{s - 1, detail::frac(3, 4)}, {s, detail::frac(1, 4)}}));
        model.action_cost.push_back(detail::frac(1, 4));
        // replace
        model.rows.push_back(detail::self_loop(broken ? s : 0));
        model.action_cost.push_back(detail::frac(1, 2));
    }
    return model;
}

/**
 * GARNET(n, 4 actions, branching 3). For s = 0..n-1 and a = 0..3 in order:
 * draw 3 distinct successors uniformly (redrawing repeats), sort them, draw
 * a weight U{1,1000} for each in sorted order, then a reward U{0,10}.
 */
inline Rmdp garnet(std::size_t n, std::uint64_t seed, const Rational& discount = Rational(1, 2)) {
    if (n < 3)
        throw ModelError("garnet needs n >= 3 states");
    SplitMix64 rng(seed);
    Rmdp model;
    model.n_actions = 4;
    model.discount = discount;
    model.cost.assign(n, Rational(0));
    for (std::size_t s = 0; s < n; ++s) {
        for (std::size_t a = 0; a < 4; ++a) {
            std::vector<std::size_t> succ;
            while (succ.size() < 3) {
                const auto t = static_cast<std::size_t>(rng.uniform(0, n - 1));
                if (std::find(succ.begin(), succ.end(), t) == succ.end())
                    succ.push_back(t);
            }
            std::sort(succ.begin(), succ.end());
            long w[3];
            long total = 0;
            for (auto& x : w) {
                x = static_cast<long>(rng.uniform(1, 1000));
                total += x;
            }
            Row row;
            row.successors = succ;
            for (auto x : w)
                row.uncertainty.nominal.push_back(detail::frac(x, total));
            model.rows.push_back(row);
            model.action_cost.push_back(-Rational(static_cast<long>(rng.uniform(0, 10))));
        }
    }
    return model;
}

/**
 * Path states 0..k-1, leaves k..2k-1, sink 2k. Action 0 (path) moves i -> i+1
 * (the last path state moves to the sink); action 1 (leaf) jumps to leaf k+i.
 * Leaves and sink are absorbing. Costs: 0 on the path, -1 on leaves,
 * -gamma^-(k+1) on the sink.
 */
inline Rmdp long_chain(std::size_t k, const Rational& discount) {
    if (k < 1)
        throw ModelError("long chain needs k >= 1");
    if (sgn(discount) <= 0 || discount >= 1)
        throw ModelError("long chain needs a discount in (0,1)");
    const std::size_t n = 2 * k + 1;
    const std::size_t sink = 2 * k;
    Rmdp model;
    model.n_actions = 2;
    model.discount = discount;
    model.cost.assign(n, Rational(0));
    for (std::size_t i = 0; i < k; ++i)
        model.cost[k + i] = -1;
    model.cost[sink] = -pow(Rational(1) / discount, static_cast<unsigned long>(k + 1));
    for (std::size_t s = 0; s < n; ++s) {
        if (s < k) {
            model.rows.push_back(detail::self_loop(s + 1 < k ? s + 1 : sink));
            model.rows.push_back(detail::self_loop(k + s));
        } else {
            model.rows.push_back(detail::self_loop(s));
            model.rows.push_back(detail::self_loop(s));
        }
    }
    return model;
}

/// Same model with every uncertainty set replaced by (nominal, radius, norm).
inline Rmdp attach_uncertainty(Rmdp model, const Rational& radius, const Norm& norm) {
    if (radius < 0)
        throw ModelError("radius must be non-negative");
    for (auto& row : model.rows) {
        row.uncertainty.radius = radius;
        row.uncertainty.norm = norm;
    }
    return model;
}

enum class BenchmarkKind { Gridworld, Inventory, MachineReplacement, Garnet, LongChain };

inline const char* to_string(BenchmarkKind kind) {
    switch (kind) {
    case BenchmarkKind::Gridworld:
        return "gridworld";
    case BenchmarkKind::Inventory:
        return "inventory";
    case BenchmarkKind::MachineReplacement:
        return "machine";
    case BenchmarkKind::Garnet:
        return "garnet";
    case BenchmarkKind::LongChain:
        return "longchain";
    }
    return "?";
}

inline BenchmarkKind parse_benchmark_kind(const std::string& text) {
    for (auto k : {BenchmarkKind::Gridworld, BenchmarkKind::Inventory, BenchmarkKind::MachineReplacement,
                   BenchmarkKind::Garnet, BenchmarkKind::LongChain})
        if (text == to_string(k))
            return k;
    throw ModelError("unknown benchmark kind '" + text +
                     "' (expected gridworld, inventory, machine, garnet or longchain)");
}

/**
 * One benchmark instance. `size` is the requested state count: gridworld
 * uses side floor(sqrt(size)), long chain uses k = (size - 1) / 2, the rest
 * use it directly.
 */
struct BenchmarkSpec {
    BenchmarkKind kind = BenchmarkKind::Gridworld;
    std::size_t size = 4;
    std::uint64_t seed = 0;
    Rational discount = Rational(1, 2);
    Rational radius = 0;
    Norm norm = Norm::l1();
};

inline std::size_t isqrt(std::size_t n) {
    std::size_t r = 0;
    while ((r + 1) * (r + 1) <= n)
        ++r;
    return r;
}

inline Rmdp make_benchmark(const BenchmarkSpec& spec) {
    if (spec.discount < 0 || spec.discount >= 1)
        throw ModelError("discount out of range [0,1)");
    Rmdp model;
    switch (spec.kind) {
    case BenchmarkKind::Gridworld:
        model = gridworld(isqrt(spec.size), spec.discount);
        break;
    case BenchmarkKind::Inventory:
        model = inventory(spec.size, spec.discount);
        break;
    case BenchmarkKind::MachineReplacement:
        model = machine_replacement(spec.size, spec.discount);
        break;
    case BenchmarkKind::Garnet:
        model = garnet(spec.size, spec.seed, spec.discount);
        break;
    case BenchmarkKind::LongChain:
        if (spec.size < 3)
            throw ModelError("long chain needs at least 3 states");
        model = long_chain((spec.size - 1) / 2, spec.discount);
        break;
    }
    return attach_uncertainty(std::move(model), spec.radius, spec.norm);
}

/// Starting agent policy used by the sweep: all-leaf for the long chain, action 0 elsewhere.
inline AgentPolicy benchmark_initial_policy(BenchmarkKind kind, const Rmdp& model) {
    return AgentPolicy(model.n_states(), kind == BenchmarkKind::LongChain ? 1 : 0);
}

} // namespace robustpi
