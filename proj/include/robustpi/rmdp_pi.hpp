#pragma once

#include "robustpi/errors.hpp"
#include "robustpi/model.hpp"
#include "robustpi/oracles.hpp"
#include "robustpi/rmc_pi.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace robustpi {

enum class ImprovementMode {
    PerPair,  ///< one oracle call per (state, action)
    BatchRmc, ///< one RMC solve of the batch construction per sweep
};

inline const char* to_string(ImprovementMode mode) {
    return mode == ImprovementMode::PerPair ? "perpair" : "batch";
}

/**
 * Iterates of one RMDP policy-iteration run. Entry t holds sigma^t, the
 * adversary's response tau^t and the value of sigma^t; the final entry is
 * the confirming evaluation of the optimal policy.
 */
struct RmdpSolveTrace {
    std::vector<AgentPolicy> policies;
    std::vector<AdversaryPolicy> adversaries;
    std::vector<ValueVector> values;
    std::vector<RmcSolveTrace> inner;
    ValueVector v_star;
    AgentPolicy sigma_star;
    AdversaryPolicy tau_star;
    std::size_t outer_iterations = 0;        ///< policy evaluations, including the confirming one
    std::size_t inner_iterations_total = 0;  ///< RMC-PI iterations summed over evaluations
    std::size_t improvement_iterations = 0;  ///< RMC-PI iterations spent in batch improvement

    /// Number of times the agent policy changed.
    std::size_t policy_changes() const { return outer_iterations == 0 ? 0 : outer_iterations - 1; }
};

/// nm (ceil(log_gamma(1 - gamma)) + 1).
inline std::size_t rmdp_iteration_bound(std::size_t n, std::size_t m, const Rational& discount) {
    return n * m * (ceil_log(discount, 1 - discount) + 1);
}

namespace detail {

inline AgentPolicy pick_minimizers(const Rmdp& model, const AgentPolicy& incumbent,
                                   const std::vector<Rational>& q) {
    AgentPolicy next(model.n_states());
    for (std::size_t s = 0; s < model.n_states(); ++s) {
        std::size_t best = 0;
        for (std::size_t a = 1; a < model.n_actions; ++a)
            if (q[model.index(s, a)] < q[model.index(s, best)])
                best = a;
        next[s] = q[model.index(s, incumbent[s])] == q[model.index(s, best)] ? incumbent[s] : best;
    }
    return next;
}

} // namespace detail

/// c(s,a) + gamma * max_p p^T v for every pair, indexed s*m + a, via direct oracle calls.
inline std::vector<Rational> q_values(const Rmdp& model, const ValueVector& values) {
    std::vector<Rational> q(model.rows.size());
    for (std::size_t s = 0; s < model.n_states(); ++s)
        for (std::size_t a = 0; a < model.n_actions; ++a)
            q[model.index(s, a)] = q_value(model, s, a, values);
    return q;
}

/// Same quantities read off the solved batch chain. Returns the number of
/// RMC-PI iterations used; more than two would contradict the construction.
inline std::size_t q_values_batch(const Rmdp& model, const ValueVector& values, std::vector<Rational>& q) {
    const BatchRmc batch = build_batch_rmc(model, values);
    const RmcSolveTrace t = rmc_policy_iteration(batch.chain);
    if (t.iterations > 2)
        throw InvariantViolation("batch RMC needed " + std::to_string(t.iterations) + " iterations");
    q.assign(model.rows.size(), Rational(0));
    for (std::size_t s = 0; s < model.n_states(); ++s)
        for (std::size_t a = 0; a < model.n_actions; ++a)
            q[model.index(s, a)] = t.v_star[batch.transient(s, a)];
    return t.iterations;
}

/**
 * Agent minimizes, adversary maximizes. Each agent policy is evaluated by
 * solving its induced RMC; improvement switches to an action minimizing the
 * q-value, keeping the incumbent on ties. Default start: action 0 everywhere.
 */
inline RmdpSolveTrace rmdp_policy_iteration(const Rmdp& model, std::optional<AgentPolicy> initial = std::nullopt,
                                            ImprovementMode mode = ImprovementMode::PerPair) {
    require_valid(model);
    require_oracle_norms(model.rows);
    AgentPolicy sigma = initial ? std::move(*initial) : AgentPolicy(model.n_states(), 0);
    if (!is_valid_policy(model, sigma))
        throw ModelError("initial agent policy does not match the model");

    const std::size_t ceiling = rmdp_iteration_bound(model.n_states(), model.n_actions, model.discount) + 1;
    RmdpSolveTrace trace;
    std::vector<Rational> q;
    while (true) {
        RmcSolveTrace inner = rmc_policy_iteration(induce_rmc(model, sigma));
        trace.inner_iterations_total += inner.iterations;
        ++trace.outer_iterations;

        if (mode == ImprovementMode::PerPair)
            q = q_values(model, inner.v_star);
        else
            trace.improvement_iterations += q_values_batch(model, inner.v_star, q);
        AgentPolicy next = detail::pick_minimizers(model, sigma, q);

        trace.policies.push_back(sigma);
        trace.adversaries.push_back(inner.tau_star);
        trace.values.push_back(inner.v_star);
        trace.inner.push_back(std::move(inner));
        if (next == sigma)
            break;
        if (trace.outer_iterations >= ceiling)
            throw InvariantViolation("RMDP policy iteration exceeded its iteration ceiling of " +
                                     std::to_string(ceiling));
        sigma = std::move(next);
    }
    trace.v_star = trace.values.back();
    trace.sigma_star = trace.policies.back();
    trace.tau_star = trace.adversaries.back();
    return trace;
}

/**
 * Continuation-cost potential of playing a in s against the optimum:
 * (q*(s,a) - q*(s, sigma*(s))) / gamma, which reduces to
 * max_{P(s,a)} p^T v* - max_{P(s,sigma*(s))} p^T v* when costs depend on the state only.
 */
inline Rational potential_rmdp(const Rmdp& model, const ValueVector& v_star, const AgentPolicy& sigma_star,
                               std::size_t s, std::size_t a) {
    const std::size_t b = sigma_star.at(s);
    Rational diff = worst_case_value(model.row(s, a), v_star) - worst_case_value(model.row(s, b), v_star);
    const Rational cost_gap = model.pair_cost(s, a) - model.pair_cost(s, b);
    if (cost_gap != 0) {
        if (sgn(model.discount) == 0)
            throw UnsupportedError("potential is undefined for a zero discount with action-dependent costs");
        diff += cost_gap / model.discount;
    }
    return diff;
}

} // namespace robustpi
