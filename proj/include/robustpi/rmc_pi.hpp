#pragma once

#include "robustpi/errors.hpp"
#include "robustpi/linalg.hpp"
#include "robustpi/model.hpp"
#include "robustpi/oracles.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace robustpi {

/// Iterates of one RMC policy-iteration run. policies[t] is tau^t and
/// values[t] its exact value; the last entry is the optimum.
struct RmcSolveTrace {
    std::vector<AdversaryPolicy> policies;
    std::vector<ValueVector> values;
    ValueVector v_star;
    AdversaryPolicy tau_star;
    std::size_t iterations = 0; ///< number of policy evaluations
};

/// Loose ceiling on RMC-PI iterations: n^3 (ceil(log2 n) + 1) (L + 1),
/// L = ceil(log_gamma((1 - gamma) / 2n)).
inline std::size_t rmc_iteration_ceiling(std::size_t n, const Rational& discount) {
    const Rational target = (1 - discount) / Rational(static_cast<long>(2 * n));
    const std::size_t l = ceil_log(discount, target);
    return n * n * n * (ceil_log2(n) + 1) * (l + 1);
}

/**
 * Alternates exact evaluation of tau^t with per-state worst-case responses,
 * stopping when the response repeats. The default start is the nominal policy.
 */
inline RmcSolveTrace rmc_policy_iteration(const Rmc& chain, std::optional<AdversaryPolicy> initial = std::nullopt) {
    require_valid(chain);
    require_oracle_norms(chain.rows);
    AdversaryPolicy tau = initial ? std::move(*initial) : nominal_policy(chain.rows);
    if (!is_feasible(chain.rows, tau))
        throw ModelError("initial adversary policy is not feasible");

    const std::size_t n = chain.n_states();
    const std::size_t ceiling = rmc_iteration_ceiling(n, chain.discount) + 2;
    RmcSolveTrace trace;
    while (true) {
        ValueVector v = solve_linear_system(evaluation_matrix(chain.discount, chain.rows, tau), chain.cost);
        AdversaryPolicy next(n);
        for (std::size_t s = 0; s < n; ++s)
            next[s] = worst_case(chain.rows[s], v).p;
        trace.policies.push_back(std::move(tau));
        trace.values.push_back(std::move(v));
        ++trace.iterations;
        if (next == trace.policies.back())
            break;
        if (trace.iterations >= ceiling)
            throw InvariantViolation("RMC policy iteration exceeded its iteration ceiling of " +
                                     std::to_string(ceiling));
        tau = std::move(next);
    }
    trace.v_star = trace.values.back();
    trace.tau_star = trace.policies.back();
    return trace;
}

} // namespace robustpi
