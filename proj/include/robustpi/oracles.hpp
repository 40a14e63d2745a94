#pragma once

#include "robustpi/errors.hpp"
#include "robustpi/model.hpp"
#include "robustpi/rational.hpp"

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

namespace robustpi {

/**
 * Successor positions ordered by descending value; equal values are ordered
 * by ascending key (the global state id when available, else the position).
 */
class SortedSuccessorView {
public:
    SortedSuccessorView() = default;

    SortedSuccessorView(const std::vector<Rational>& values, const std::vector<std::size_t>& keys = {}) {
        if (!keys.empty() && keys.size() != values.size())
            throw ModelError("sort keys and values differ in length");
        order_.resize(values.size());
        std::iota(order_.begin(), order_.end(), std::size_t{0});
        auto key = [&](std::size_t i) { return keys.empty() ? i : keys[i]; };
        std::sort(order_.begin(), order_.end(), [&](std::size_t a, std::size_t b) {
            const int c = cmp(values[a], values[b]);
            if (c != 0)
                return c > 0;
            return key(a) < key(b);
        });
    }

    std::size_t size() const { return order_.size(); }
    /// Position (in the successor list) of the i-th largest value.
    std::size_t operator[](std::size_t i) const { return order_[i]; }
    const std::vector<std::size_t>& order() const { return order_; }

private:
    std::vector<std::size_t> order_;
};

enum class MassTag {
    Receiver,   ///< gained mass up to its cap
    NotChanged, ///< L1: untouched coordinate
    Donor,      ///< Linf: gave away exactly the radius
    Zeroed,     ///< gave away everything
    Incomplete, ///< the single coordinate where the budget ran out
};

inline const char* to_string(MassTag tag) {
    switch (tag) {
    case MassTag::Receiver:
        return "receiver";
    case MassTag::NotChanged:
        return "not-changed";
    case MassTag::Donor:
        return "donor";
    case MassTag::Zeroed:
        return "zeroed";
    case MassTag::Incomplete:
        return "incomplete";
    }
    return "?";
}

/// Oracle output: the distribution (by successor position) and one tag per position.
struct StructuredDistribution {
    Distribution p;
    std::vector<MassTag> tags;
    SortedSuccessorView order;
};

inline Rational dot(const std::vector<Rational>& a, const std::vector<Rational>& b) {
    Rational acc = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (sgn(a[i]) != 0)
            acc += a[i] * b[i];
    return acc;
}

namespace detail {

inline void check_oracle_input(const Distribution& nominal, const std::vector<Rational>& values,
                               const Rational& radius) {
    if (nominal.size() != values.size())
        throw ModelError("oracle: nominal has length " + std::to_string(nominal.size()) +
                         " but values has length " + std::to_string(values.size()));
    if (nominal.empty())
        throw ModelError("oracle: empty successor list");
    if (radius < 0)
        throw ModelError("oracle: negative radius");
}

} // namespace detail

/**
 * max p^T v over the L1 ball of radius `radius` around `nominal`, within
 * the simplex. Mass moves from the lowest-valued successors to the single
 * highest-valued one; each unit moved spends two units of radius.
 */
inline StructuredDistribution l1_worst_case(const Distribution& nominal, const std::vector<Rational>& values,
                                            const Rational& radius,
                                            const std::vector<std::size_t>& tie_keys = {}) {
    detail::check_oracle_input(nominal, values, radius);
    StructuredDistribution out;
    out.order = SortedSuccessorView(values, tie_keys);
    out.p = nominal;
    const std::size_t d = nominal.size();
    out.tags.assign(d, MassTag::NotChanged);

    const std::size_t top = out.order[0];
    Rational budget = radius;
    std::size_t hi = d - 1;
    std::size_t visited_from = d; // sorted ranks >= visited_from were donors
    while (sgn(budget) > 0 && hi > 0) {
        const std::size_t pos = out.order[hi];
        Rational half = budget / 2;
        Rational moved = out.p[pos] < half ? out.p[pos] : half;
        out.p[pos] -= moved;
        out.p[top] += moved;
        budget -= 2 * moved;
        visited_from = hi;
        --hi;
    }

    out.tags[top] = MassTag::Receiver;
    for (std::size_t r = visited_from; r < d; ++r) {
        const std::size_t pos = out.order[r];
        out.tags[pos] = sgn(out.p[pos]) == 0 ? MassTag::Zeroed : MassTag::Incomplete;
    }
    return out;
}

/**
 * max p^T v over the Linf ball. Two pointers walk inward from the best and
 * worst successors; every coordinate may shift by at most `radius`.
 */
inline StructuredDistribution linf_worst_case(const Distribution& nominal, const std::vector<Rational>& values,
                                              const Rational& radius,
                                              const std::vector<std::size_t>& tie_keys = {}) {
    detail::check_oracle_input(nominal, values, radius);
    StructuredDistribution out;
    out.order = SortedSuccessorView(values, tie_keys);
    out.p = nominal;
    const std::size_t d = nominal.size();
    out.tags.assign(d, MassTag::NotChanged);

    std::size_t hi = 0;
    std::size_t lo = d - 1;
    Rational budget_hi = radius;
    Rational budget_lo = radius;
    while (hi < lo) {
        const std::size_t ph = out.order[hi];
        const std::size_t pl = out.order[lo];
        Rational room = 1 - out.p[ph];
        Rational give_hi = budget_hi < room ? budget_hi : room;
        Rational give_lo = budget_lo < out.p[pl] ? budget_lo : out.p[pl];
        Rational t = give_hi < give_lo ? give_hi : give_lo;
        out.p[ph] += t;
        out.p[pl] -= t;
        budget_hi -= t;
        budget_lo -= t;
        if (sgn(budget_hi) == 0 || out.p[ph] == 1) {
            ++hi;
            budget_hi = radius;
        } else {
            --lo;
            budget_lo = radius;
        }
    }

    auto donor_tag = [&](std::size_t pos) {
        return sgn(out.p[pos]) == 0 && nominal[pos] <= radius ? MassTag::Zeroed : MassTag::Donor;
    };
    for (std::size_t r = 0; r < d; ++r) {
        const std::size_t pos = out.order[r];
        if (r < hi) {
            out.tags[pos] = MassTag::Receiver;
        } else if (r > hi) {
            out.tags[pos] = donor_tag(pos);
        } else {
            Rational cap = nominal[pos] + radius;
            if (cap > 1)
                cap = 1;
            if (out.p[pos] == cap)
                out.tags[pos] = MassTag::Receiver;
            else if (out.p[pos] == nominal[pos] - radius)
                out.tags[pos] = MassTag::Donor;
            else if (sgn(out.p[pos]) == 0 && nominal[pos] <= radius)
                out.tags[pos] = MassTag::Zeroed;
            else
                out.tags[pos] = MassTag::Incomplete;
        }
    }
    return out;
}

/// Empty when `out` has the L1 structure; otherwise the first violated rule.
inline std::string check_l1_structure(const Distribution& nominal, const Rational& radius,
                                      const StructuredDistribution& out) {
    const std::size_t d = nominal.size();
    if (out.p.size() != d || out.tags.size() != d || out.order.size() != d)
        return "length mismatch";
    std::size_t receivers = 0, incomplete = 0;
    Rational zeroed_mass = 0;
    std::size_t incomplete_pos = d;
    for (std::size_t i = 0; i < d; ++i) {
        switch (out.tags[i]) {
        case MassTag::Receiver:
            ++receivers;
            break;
        case MassTag::Zeroed:
            if (sgn(out.p[i]) != 0)
                return "zeroed coordinate " + std::to_string(i) + " is not 0";
            zeroed_mass += nominal[i];
            break;
        case MassTag::NotChanged:
            if (out.p[i] != nominal[i])
                return "unchanged coordinate " + std::to_string(i) + " moved";
            break;
        case MassTag::Incomplete:
            ++incomplete;
            incomplete_pos = i;
            break;
        case MassTag::Donor:
            return "donor tag is not used for L1";
        }
    }
    if (receivers != 1 || out.tags[out.order[0]] != MassTag::Receiver)
        return "receiver is not the top-ranked successor";
    if (incomplete > 1)
        return "more than one incomplete coordinate";
    Rational cap = nominal[out.order[0]] + radius / 2;
    if (cap > 1)
        cap = 1;
    if (out.p[out.order[0]] != cap)
        return "receiver holds " + to_string(out.p[out.order[0]]) + ", expected " + to_string(cap);
    if (incomplete == 1) {
        const Rational expected = nominal[incomplete_pos] - radius / 2 + zeroed_mass;
        if (out.p[incomplete_pos] != expected)
            return "incomplete coordinate holds " + to_string(out.p[incomplete_pos]) + ", expected " +
                   to_string(expected);
    }
    // donors form a suffix of the ranking
    bool in_suffix = false;
    for (std::size_t r = 1; r < d; ++r) {
        const bool changed = out.tags[out.order[r]] != MassTag::NotChanged;
        if (in_suffix && !changed)
            return "donors are not the lowest-ranked successors";
        in_suffix = in_suffix || changed;
    }
    return {};
}

/// Empty when `out` has the Linf structure; otherwise the first violated rule.
inline std::string check_linf_structure(const Distribution& nominal, const Rational& radius,
                                        const StructuredDistribution& out) {
    const std::size_t d = nominal.size();
    if (out.p.size() != d || out.tags.size() != d || out.order.size() != d)
        return "length mismatch";
    std::size_t incomplete = 0;
    int phase = 0; // 0 receivers, 1 incomplete, 2 donors/zeroed
    for (std::size_t r = 0; r < d; ++r) {
        const std::size_t i = out.order[r];
        int tag_phase = 0;
        switch (out.tags[i]) {
        case MassTag::Receiver: {
            Rational cap = nominal[i] + radius;
            if (cap > 1)
                cap = 1;
            if (out.p[i] != cap)
                return "receiver " + std::to_string(i) + " holds " + to_string(out.p[i]) + ", expected " +
                       to_string(cap);
            tag_phase = 0;
            break;
        }
        case MassTag::Donor:
            if (out.p[i] != nominal[i] - radius)
                return "donor " + std::to_string(i) + " did not give exactly the radius";
            tag_phase = 2;
            break;
        case MassTag::Zeroed:
            if (sgn(out.p[i]) != 0 || nominal[i] > radius)
                return "zeroed coordinate " + std::to_string(i) + " is inconsistent";
            tag_phase = 2;
            break;
        case MassTag::Incomplete:
            ++incomplete;
            tag_phase = 1;
            break;
        case MassTag::NotChanged:
            return "not-changed tag is not used for Linf";
        }
        if (tag_phase < phase)
            return "tags are not ordered receivers, incomplete, donors";
        phase = tag_phase;
    }
    if (incomplete > 1)
        return "more than one incomplete coordinate";
    return {};
}

/**
 * Exact max of p^T v over the L1 or Linf ball intersected with the simplex,
 * by enumerating every point cut out by a full set of active constraints and
 * keeping the feasible ones. Dimension is limited to 6.
 */
inline Rational brute_force_worst_case(const Distribution& nominal, const std::vector<Rational>& values,
                                       const Rational& radius, const Norm& norm) {
    detail::check_oracle_input(nominal, values, radius);
    const std::size_t d = nominal.size();
    if (d > 6)
        throw UnsupportedError("brute_force_worst_case: dimension " + std::to_string(d) + " exceeds 6");
    if (norm.kind == NormKind::Lp)
        throw UnsupportedError("brute_force_worst_case: only l1 and linf are supported");

    UncertaintySet set{nominal, radius, norm};
    bool found = false;
    Rational best = 0;
    auto consider = [&](const Distribution& p) {
        if (!is_feasible(set, p))
            return;
        Rational obj = dot(p, values);
        if (!found || obj > best) {
            best = obj;
            found = true;
        }
    };

    // fixed-value choices per coordinate
    std::vector<std::vector<Rational>> options(d);
    for (std::size_t i = 0; i < d; ++i) {
        if (norm.kind == NormKind::LInf)
            options[i] = {Rational(0), Rational(1), nominal[i] - radius, nominal[i] + radius};
        else
            options[i] = {Rational(0), Rational(1), nominal[i]};
    }

    // Assign a fixed option to every coordinate outside `free_set`.
    auto for_each_assignment = [&](const std::vector<std::size_t>& free_set, auto&& visit) {
        std::vector<std::size_t> fixed;
        for (std::size_t i = 0; i < d; ++i)
            if (std::find(free_set.begin(), free_set.end(), i) == free_set.end())
                fixed.push_back(i);
        std::vector<std::size_t> choice(fixed.size(), 0);
        Distribution p(d);
        while (true) {
            for (std::size_t k = 0; k < fixed.size(); ++k)
                p[fixed[k]] = options[fixed[k]][choice[k]];
            visit(p, fixed);
            std::size_t k = 0;
            while (k < fixed.size() && ++choice[k] == options[fixed[k]].size())
                choice[k++] = 0;
            if (k == fixed.size())
                break;
        }
    };

    // one free coordinate, pinned by the sum constraint
    for (std::size_t f = 0; f < d; ++f) {
        for_each_assignment({f}, [&](Distribution& p, const std::vector<std::size_t>& fixed) {
            Rational rest = 1;
            for (auto i : fixed)
                rest -= p[i];
            p[f] = rest;
            consider(p);
        });
    }

    // L1: two free coordinates, pinned by the sum and one sign face of the ball
    if (norm.kind == NormKind::L1 && d >= 2) {
        for (std::size_t a = 0; a < d; ++a) {
            for (std::size_t b = a + 1; b < d; ++b) {
                for_each_assignment({a, b}, [&](Distribution& p, const std::vector<std::size_t>& fixed) {
                    // Face sum_i sigma_i (p_i - nominal_i) = radius; fixed coordinates
                    // contribute |p_i - nominal_i|, the free pair has opposite signs s, -s.
                    Rational rest = 1;
                    Rational slack = radius;
                    for (auto i : fixed) {
                        rest -= p[i];
                        slack -= abs(p[i] - nominal[i]);
                    }
                    for (int s : {1, -1}) {
                        Rational diff = nominal[a] - nominal[b];
                        if (s > 0)
                            diff += slack;
                        else
                            diff -= slack;
                        p[a] = (rest + diff) / 2;
                        p[b] = (rest - diff) / 2;
                        consider(p);
                    }
                });
            }
        }
    }
    if (!found)
        throw InvariantViolation("brute_force_worst_case: no feasible vertex found");
    return best;
}

namespace detail {

inline std::vector<Rational> gather(const Row& row, const ValueVector& values) {
    std::vector<Rational> local;
    local.reserve(row.successors.size());
    for (auto t : row.successors)
        local.push_back(values[t]);
    return local;
}

} // namespace detail

/// Worst-case distribution of one row against the global value vector.
inline StructuredDistribution worst_case(const Row& row, const ValueVector& values) {
    const std::vector<Rational> local = detail::gather(row, values);
    const auto& u = row.uncertainty;
    switch (u.norm.kind) {
    case NormKind::L1:
        return l1_worst_case(u.nominal, local, u.radius, row.successors);
    case NormKind::LInf:
        return linf_worst_case(u.nominal, local, u.radius, row.successors);
    case NormKind::Lp:
        break;
    }
    throw UnsupportedError("no exact oracle for " + to_string(u.norm) + " uncertainty sets");
}

/// max over the row's uncertainty set of p^T values.
inline Rational worst_case_value(const Row& row, const ValueVector& values) {
    const auto w = worst_case(row, values);
    Rational acc = 0;
    for (std::size_t k = 0; k < row.successors.size(); ++k)
        if (sgn(w.p[k]) != 0)
            acc += w.p[k] * values[row.successors[k]];
    return acc;
}

inline void require_oracle_norms(const std::vector<Row>& rows) {
    for (std::size_t i = 0; i < rows.size(); ++i)
        if (rows[i].uncertainty.norm.kind == NormKind::Lp)
            throw UnsupportedError("row " + std::to_string(i) + " uses " + to_string(rows[i].uncertainty.norm) +
                                   "; only l1 and linf sets can be solved");
}

/// (T v)_s = c_s + gamma * max_p p^T v.
inline ValueVector apply_bellman(const Rmc& chain, const ValueVector& values) {
    if (values.size() != chain.n_states())
        throw ModelError("apply_bellman: value vector has wrong length");
    require_oracle_norms(chain.rows);
    ValueVector out(chain.n_states());
    for (std::size_t s = 0; s < chain.n_states(); ++s)
        out[s] = chain.cost[s] + chain.discount * worst_case_value(chain.rows[s], values);
    return out;
}

/// Improvement quantity c(s,a) + gamma * max_p p^T v for one pair.
inline Rational q_value(const Rmdp& model, std::size_t s, std::size_t a, const ValueVector& values) {
    return model.pair_cost(s, a) + model.discount * worst_case_value(model.row(s, a), values);
}

/// (T v)_s = min_a [c(s,a) + gamma * max_p p^T v].
inline ValueVector apply_bellman(const Rmdp& model, const ValueVector& values) {
    if (values.size() != model.n_states())
        throw ModelError("apply_bellman: value vector has wrong length");
    require_oracle_norms(model.rows);
    ValueVector out(model.n_states());
    for (std::size_t s = 0; s < model.n_states(); ++s) {
        for (std::size_t a = 0; a < model.n_actions; ++a) {
            Rational q = q_value(model, s, a, values);
            if (a == 0 || q < out[s])
                out[s] = q;
        }
    }
    return out;
}

} // namespace robustpi
