#pragma once

#include "robustpi/errors.hpp"
#include "robustpi/rational.hpp"

#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace robustpi {

using ValueVector = std::vector<Rational>;
using Distribution = std::vector<Rational>;

/// Action index per state.
using AgentPolicy = std::vector<std::size_t>;

/**
 * One distribution per row. A row is a state for an Rmc and a
 * (state, action) pair `s * n_actions + a` for an Rmdp. Each distribution is
 * indexed by position in that row's successor list.
 */
using AdversaryPolicy = std::vector<Distribution>;

enum class NormKind { L1, LInf, Lp };

struct Norm {
    NormKind kind = NormKind::L1;
    unsigned p = 1; ///< exponent; meaningful only for NormKind::Lp (p >= 2)

    static Norm l1() { return {NormKind::L1, 1}; }
    static Norm linf() { return {NormKind::LInf, 0}; }
    static Norm lp(unsigned p) { return {NormKind::Lp, p}; }

    friend bool operator==(const Norm& a, const Norm& b) {
        return a.kind == b.kind && (a.kind != NormKind::Lp || a.p == b.p);
    }
};

/// "l1", "linf" or "lp:<p>".
inline std::string to_string(const Norm& norm) {
    switch (norm.kind) {
    case NormKind::L1:
        return "l1";
    case NormKind::LInf:
        return "linf";
    case NormKind::Lp:
        return "lp:" + std::to_string(norm.p);
    }
    return "?";
}

inline Norm parse_norm(const std::string& text) {
    if (text == "l1")
        return Norm::l1();
    if (text == "linf")
        return Norm::linf();
    if (text.rfind("lp:", 0) == 0) {
        const std::string digits = text.substr(3);
        if (!digits.empty() && digits.size() < 6 &&
            digits.find_first_not_of("0123456789") == std::string::npos) {
            const unsigned p = static_cast<unsigned>(std::stoul(digits));
            if (p >= 2)
                return Norm::lp(p);
        }
    }
    throw ModelError("unknown norm '" + text + "' (expected l1, linf or lp:<p> with p >= 2)");
}

/// Lp ball of radius `radius` around `nominal`, intersected with the simplex.
struct UncertaintySet {
    Distribution nominal;
    Rational radius = 0;
    Norm norm = Norm::l1();
};

/// Successor list of a row plus the uncertainty set over it.
struct Row {
    std::vector<std::size_t> successors;
    UncertaintySet uncertainty;
};

struct Rmc {
    Rational discount;
    std::vector<Rational> cost; ///< per state
    std::vector<Row> rows;      ///< per state

    std::size_t n_states() const { return cost.size(); }
};

/**
 * Finite RMDP with (s,a)-rectangular Lp uncertainty.
 *
 * The cost of playing `a` in `s` is `cost[s] + action_cost[s*m + a]`;
 * `action_cost` may be left empty when costs depend on the state only.
 */
struct Rmdp {
    std::size_t n_actions = 1;
    Rational discount;
    std::vector<Rational> cost;        ///< per state
    std::vector<Row> rows;             ///< per (state, action), row-major
    std::vector<Rational> action_cost; ///< empty, or one entry per row

    std::size_t n_states() const { return cost.size(); }
    std::size_t index(std::size_t s, std::size_t a) const { return s * n_actions + a; }
    const Row& row(std::size_t s, std::size_t a) const { return rows[index(s, a)]; }

    Rational pair_cost(std::size_t s, std::size_t a) const {
        if (action_cost.empty())
            return cost[s];
        return cost[s] + action_cost[index(s, a)];
    }

    bool has_action_costs() const {
        for (const auto& c : action_cost)
            if (c != 0)
                return true;
        return false;
    }
};

/// Views an Rmc as a one-action Rmdp.
inline Rmdp as_rmdp(const Rmc& chain) {
    Rmdp model;
    model.n_actions = 1;
    model.discount = chain.discount;
    model.cost = chain.cost;
    model.rows = chain.rows;
    return model;
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

namespace detail {

inline std::string where(std::size_t s, std::optional<std::size_t> a) {
    if (a)
        return "(" + std::to_string(s) + "," + std::to_string(*a) + ")";
    return "(" + std::to_string(s) + ")";
}

inline void validate_row(const Row& row, std::size_t n_states, const std::string& at,
                         std::vector<std::string>& out) {
    if (row.successors.empty())
        out.push_back("empty successor list at " + at);
    std::set<std::size_t> seen;
    for (auto t : row.successors) {
        if (t >= n_states)
            out.push_back("successor " + std::to_string(t) + " out of range at " + at);
        if (!seen.insert(t).second)
            out.push_back("duplicate successor " + std::to_string(t) + " at " + at);
    }
    const auto& u = row.uncertainty;
    if (u.nominal.size() != row.successors.size())
        out.push_back("nominal length " + std::to_string(u.nominal.size()) +
                      " != successor count " + std::to_string(row.successors.size()) + " at " + at);
    Rational sum = 0;
    bool negative = false;
    for (const auto& p : u.nominal) {
        if (p < 0)
            negative = true;
        sum += p;
    }
    if (negative)
        out.push_back("negative nominal probability at " + at);
    if (sum != 1)
        out.push_back("sum != 1 at " + at + " (sum " + to_string(sum) + ")");
    if (u.radius < 0)
        out.push_back("negative radius at " + at);
    if (u.norm.kind == NormKind::Lp && u.norm.p < 2)
        out.push_back("lp norm exponent below 2 at " + at);
}

inline void validate_discount(const Rational& discount, std::vector<std::string>& out) {
    if (discount < 0 || discount >= 1)
        out.push_back("discount out of range [0,1): " + to_string(discount));
}

} // namespace detail

/// Every violated structural invariant, one description each; empty when valid.
inline std::vector<std::string> validate_rmdp(const Rmdp& model) {
    std::vector<std::string> out;
    detail::validate_discount(model.discount, out);
    const std::size_t n = model.n_states();
    if (n == 0)
        out.push_back("model has no states");
    if (model.n_actions == 0)
        out.push_back("model has no actions");
    if (model.rows.size() != n * model.n_actions) {
        out.push_back("expected " + std::to_string(n * model.n_actions) + " rows, found " +
                      std::to_string(model.rows.size()));
        return out;
    }
    if (!model.action_cost.empty() && model.action_cost.size() != model.rows.size())
        out.push_back("action cost table has wrong length");
    for (std::size_t s = 0; s < n; ++s)
        for (std::size_t a = 0; a < model.n_actions; ++a)
            detail::validate_row(model.row(s, a), n, detail::where(s, a), out);
    return out;
}

inline std::vector<std::string> validate_rmc(const Rmc& chain) {
    std::vector<std::string> out;
    detail::validate_discount(chain.discount, out);
    if (chain.n_states() == 0)
        out.push_back("model has no states");
    if (chain.rows.size() != chain.n_states()) {
        out.push_back("expected " + std::to_string(chain.n_states()) + " rows, found " +
                      std::to_string(chain.rows.size()));
        return out;
    }
    for (std::size_t s = 0; s < chain.n_states(); ++s)
        detail::validate_row(chain.rows[s], chain.n_states(), detail::where(s, std::nullopt), out);
    return out;
}

namespace detail {

inline void throw_if_invalid(const std::vector<std::string>& violations) {
    if (violations.empty())
        return;
    std::string msg = "invalid model: " + violations.front();
    if (violations.size() > 1)
        msg += " (and " + std::to_string(violations.size() - 1) + " more)";
    throw ModelError(msg);
}

} // namespace detail

inline void require_valid(const Rmdp& model) { detail::throw_if_invalid(validate_rmdp(model)); }
inline void require_valid(const Rmc& chain) { detail::throw_if_invalid(validate_rmc(chain)); }

// ---------------------------------------------------------------------------
// Feasibility of adversary choices
// ---------------------------------------------------------------------------

/**
 * Exact membership of `dist` in the simplex intersected with the uncertainty
 * ball. Lp(p) balls compare sum |d_i|^p against radius^p, avoiding roots.
 */
inline bool is_feasible(const UncertaintySet& set, const Distribution& dist) {
    if (dist.size() != set.nominal.size())
        return false;
    Rational sum = 0;
    for (const auto& x : dist) {
        if (x < 0)
            return false;
        sum += x;
    }
    if (sum != 1)
        return false;
    switch (set.norm.kind) {
    case NormKind::L1: {
        Rational total = 0;
        for (std::size_t i = 0; i < dist.size(); ++i)
            total += abs(dist[i] - set.nominal[i]);
        return total <= set.radius;
    }
    case NormKind::LInf:
        return sup_distance(dist, set.nominal) <= set.radius;
    case NormKind::Lp: {
        Rational total = 0;
        for (std::size_t i = 0; i < dist.size(); ++i)
            total += pow(abs(dist[i] - set.nominal[i]), set.norm.p);
        return total <= pow(set.radius, set.norm.p);
    }
    }
    return false;
}

/// Nominal distribution of every row; always feasible.
inline AdversaryPolicy nominal_policy(const std::vector<Row>& rows) {
    AdversaryPolicy out;
    out.reserve(rows.size());
    for (const auto& r : rows)
        out.push_back(r.uncertainty.nominal);
    return out;
}

inline bool is_feasible(const std::vector<Row>& rows, const AdversaryPolicy& adversary) {
    if (adversary.size() != rows.size())
        return false;
    for (std::size_t i = 0; i < rows.size(); ++i)
        if (!is_feasible(rows[i].uncertainty, adversary[i]))
            return false;
    return true;
}

inline bool is_valid_policy(const Rmdp& model, const AgentPolicy& policy) {
    if (policy.size() != model.n_states())
        return false;
    for (auto a : policy)
        if (a >= model.n_actions)
            return false;
    return true;
}

// ---------------------------------------------------------------------------
// Constructions
// ---------------------------------------------------------------------------

/// The RMC obtained by fixing the agent's positional policy.
inline Rmc induce_rmc(const Rmdp& model, const AgentPolicy& policy) {
    if (!is_valid_policy(model, policy))
        throw ModelError("agent policy does not match the model (length or action index)");
    Rmc chain;
    chain.discount = model.discount;
    chain.cost.reserve(model.n_states());
    chain.rows.reserve(model.n_states());
    for (std::size_t s = 0; s < model.n_states(); ++s) {
        chain.cost.push_back(model.pair_cost(s, policy[s]));
        chain.rows.push_back(model.row(s, policy[s]));
    }
    return chain;
}

/**
 * Auxiliary chain whose transient values are all improvement quantities
 * c(s,a) + gamma * max_p p^T values at once.
 *
 * Layout: transient state z_{s,a} has index s*m + a and moves into the
 * absorbing copies of its successors under the original uncertainty set;
 * absorbing state x_s has index n*m + s, a self-loop with radius zero and
 * cost (1 - gamma) * values[s], so its value is exactly values[s].
 */
struct BatchRmc {
    Rmc chain;
    std::size_t n_states = 0;
    std::size_t n_actions = 0;

    std::size_t transient(std::size_t s, std::size_t a) const { return s * n_actions + a; }
    std::size_t absorbing(std::size_t s) const { return n_states * n_actions + s; }
};

inline BatchRmc build_batch_rmc(const Rmdp& model, const ValueVector& values) {
    const std::size_t n = model.n_states();
    const std::size_t m = model.n_actions;
    if (values.size() != n)
        throw ModelError("value vector length " + std::to_string(values.size()) +
                         " does not match state count " + std::to_string(n));
    BatchRmc batch;
    batch.n_states = n;
    batch.n_actions = m;
    batch.chain.discount = model.discount;
    batch.chain.cost.reserve(n * m + n);
    batch.chain.rows.reserve(n * m + n);
    for (std::size_t s = 0; s < n; ++s) {
        for (std::size_t a = 0; a < m; ++a) {
            Row row = model.row(s, a);
            for (auto& t : row.successors)
                t = n * m + t;
            batch.chain.cost.push_back(model.pair_cost(s, a));
            batch.chain.rows.push_back(std::move(row));
        }
    }
    const Rational keep = 1 - model.discount;
    for (std::size_t s = 0; s < n; ++s) {
        batch.chain.cost.push_back(keep * values[s]);
        Row loop;
        loop.successors = {n * m + s};
        loop.uncertainty.nominal = {Rational(1)};
        loop.uncertainty.radius = 0;
        loop.uncertainty.norm = Norm::l1();
        batch.chain.rows.push_back(std::move(loop));
    }
    return batch;
}

} // namespace robustpi
