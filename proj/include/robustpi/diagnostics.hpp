#pragma once

#include "robustpi/model.hpp"
#include "robustpi/oracles.hpp"
#include "robustpi/rational.hpp"
#include "robustpi/rmc_pi.hpp"
#include "robustpi/rmdp_pi.hpp"

#include <cstddef>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace robustpi {

/**
 * F(s,i) = sum_{j <= i} p_{s, s_j} with successors ranked by descending v*
 * (ties by ascending state id). Index i is 0-based here: F[s][i] covers the
 * first i+1 ranked successors, so F[s].back() == 1.
 */
struct CumulativeGapTable {
    std::vector<std::vector<std::size_t>> order; ///< ranked successor positions per state
    std::vector<std::vector<Rational>> F;
};

/// f(s,i) = (F*(s,i) - F(s,i)) (v*_{s_i} - v*_{s_{i+1}}) for i < |succ(s)| - 1.
struct PotentialTable {
    std::vector<std::vector<Rational>> f;
};

inline CumulativeGapTable cumulative_gaps(const Rmc& chain, const ValueVector& v_star,
                                          const AdversaryPolicy& adversary) {
    const std::size_t n = chain.n_states();
    CumulativeGapTable table;
    table.order.resize(n);
    table.F.resize(n);
    for (std::size_t s = 0; s < n; ++s) {
        const Row& row = chain.rows[s];
        std::vector<Rational> local;
        for (auto t : row.successors)
            local.push_back(v_star[t]);
        table.order[s] = SortedSuccessorView(local, row.successors).order();
        Rational acc = 0;
        for (auto pos : table.order[s]) {
            acc += adversary[s][pos];
            table.F[s].push_back(acc);
        }
    }
    return table;
}

inline PotentialTable potentials(const Rmc& chain, const ValueVector& v_star, const CumulativeGapTable& best,
                                 const CumulativeGapTable& current) {
    PotentialTable table;
    table.f.resize(chain.n_states());
    for (std::size_t s = 0; s < chain.n_states(); ++s) {
        const auto& order = best.order[s];
        const auto& succ = chain.rows[s].successors;
        for (std::size_t i = 0; i + 1 < order.size(); ++i) {
            const Rational step = v_star[succ[order[i]]] - v_star[succ[order[i + 1]]];
            table.f[s].push_back((best.F[s][i] - current.F[s][i]) * step);
        }
    }
    return table;
}

enum class CheckStatus { Pass, Fail, Vacuous };

inline const char* to_string(CheckStatus s) {
    switch (s) {
    case CheckStatus::Pass:
        return "pass";
    case CheckStatus::Fail:
        return "FAIL";
    case CheckStatus::Vacuous:
        return "vacuous";
    }
    return "?";
}

/// One checked inequality class at one iterate, with its tightest witness.
struct DiagnosticLine {
    std::string iter; ///< iterate index, or "all" for whole-trace checks
    std::string check;
    CheckStatus status = CheckStatus::Pass;
    std::optional<std::size_t> state;
    std::optional<std::size_t> index; ///< 1-based successor rank, or an action
    Rational lhs, rhs;
};

/// The gap F*(s,i) - F(s,i) dropped to a lower power of two between two iterates.
struct HalvingEvent {
    std::size_t state = 0;
    std::size_t index = 0; ///< 1-based
    std::size_t iter = 0;  ///< gap measured at iter, then at iter + 1
    long from_msb = 0;
    std::optional<long> to_msb; ///< empty when the gap reached zero
};

struct DiagnosticReport {
    std::vector<DiagnosticLine> lines;
    std::vector<HalvingEvent> events;

    std::size_t violations() const {
        std::size_t k = 0;
        for (const auto& l : lines)
            if (l.status == CheckStatus::Fail)
                ++k;
        return k;
    }

    /// "iter, check, status, witness(s,i), lhs, rhs" per line.
    std::string to_text() const {
        std::ostringstream out;
        for (const auto& l : lines) {
            out << l.iter << ", " << l.check << ", " << to_string(l.status) << ", ";
            if (l.state) {
                out << "(" << *l.state;
                if (l.index)
                    out << "," << *l.index;
                out << ")";
            } else {
                out << "-";
            }
            out << ", " << to_string(l.lhs) << ", " << to_string(l.rhs) << "\n";
        }
        return out.str();
    }

    void append(const DiagnosticReport& other, const std::string& prefix) {
        for (auto l : other.lines) {
            l.iter = prefix + l.iter;
            lines.push_back(std::move(l));
        }
        events.insert(events.end(), other.events.begin(), other.events.end());
    }
};

namespace detail {

/// Tracks the witness with the smallest slack for an inequality lhs >= rhs.
struct Tightest {
    bool any = false;
    Rational slack, lhs, rhs;
    std::optional<std::size_t> state, index;

    void offer(const Rational& l, const Rational& r, std::optional<std::size_t> s = std::nullopt,
               std::optional<std::size_t> i = std::nullopt) {
        Rational d = l - r;
        if (!any || d < slack) {
            any = true;
            slack = d;
            lhs = l;
            rhs = r;
            state = s;
            index = i;
        }
    }

    DiagnosticLine line(const std::string& iter, const std::string& check) const {
        DiagnosticLine out;
        out.iter = iter;
        out.check = check;
        if (!any) {
            out.status = CheckStatus::Vacuous;
            return out;
        }
        out.status = sgn(slack) >= 0 ? CheckStatus::Pass : CheckStatus::Fail;
        out.state = state;
        out.index = index;
        out.lhs = lhs;
        out.rhs = rhs;
        return out;
    }
};

inline Rational sup_gap(const ValueVector& a, const ValueVector& b) { return sup_distance(a, b); }

/// monotone (direction +1: non-decreasing, -1: non-increasing) and decay lines for iterate t.
inline void value_sequence_lines(DiagnosticReport& report, const std::vector<ValueVector>& values,
                                 const ValueVector& v_star, const Rational& discount, int direction) {
    const Rational initial_error = sup_gap(values.front(), v_star);
    Rational decay = 1;
    for (std::size_t t = 0; t < values.size(); ++t) {
        const std::string it = std::to_string(t);
        if (t > 0) {
            Tightest mono;
            for (std::size_t s = 0; s < v_star.size(); ++s) {
                if (direction > 0)
                    mono.offer(values[t][s], values[t - 1][s], s);
                else
                    mono.offer(values[t - 1][s], values[t][s], s);
            }
            report.lines.push_back(mono.line(it, "monotone"));
        }
        Tightest dec;
        dec.offer(decay * initial_error, sup_gap(values[t], v_star));
        DiagnosticLine l = dec.line(it, "decay");
        std::swap(l.lhs, l.rhs); // read as ||v^t - v*|| <= gamma^t ||v^0 - v*||
        report.lines.push_back(l);
        decay *= discount;
    }
}

} // namespace detail

/// Ceiling on MSB drops per (s,i): 2 (n+2) (ceil(log2(n+2)) + 1).
inline std::size_t halving_ceiling(std::size_t n) { return 2 * (n + 2) * (ceil_log2(n + 2) + 1); }

/**
 * Checks every recorded iterate of an RMC solve against the convergence
 * inequalities: monotone values, exponential decay, F-dominance, potential
 * non-negativity, the per-state lower bound, the global upper bound, and
 * halving of the maximizing gap after L more iterations. Also records every
 * binary-scale drop of each gap.
 */
inline DiagnosticReport verify_trace(const Rmc& chain, const RmcSolveTrace& trace) {
    DiagnosticReport report;
    const std::size_t n = chain.n_states();
    const std::size_t T = trace.policies.size();
    const Rational& gamma = chain.discount;
    const ValueVector& v_star = trace.v_star;
    if (T == 0)
        return report;

    detail::value_sequence_lines(report, trace.values, v_star, gamma, +1);

    const CumulativeGapTable best = cumulative_gaps(chain, v_star, trace.tau_star);
    const std::size_t L = ceil_log(gamma, (1 - gamma) / Rational(static_cast<long>(2 * n)));
    const Rational upper_factor = gamma * Rational(static_cast<long>(n)) / (1 - gamma);

    std::vector<std::vector<std::vector<Rational>>> gaps(T); // gaps[t][s][i]
    std::vector<Rational> f_hat(T);
    std::vector<std::vector<std::pair<std::size_t, std::size_t>>> maximizers(T);

    for (std::size_t t = 0; t < T; ++t) {
        const std::string it = std::to_string(t);
        const CumulativeGapTable cur = cumulative_gaps(chain, v_star, trace.policies[t]);
        const PotentialTable pot = potentials(chain, v_star, best, cur);
        const ValueVector& v = trace.values[t];

        detail::Tightest dominance, nonneg, lower;
        gaps[t].resize(n);
        for (std::size_t s = 0; s < n; ++s) {
            for (std::size_t i = 0; i < best.F[s].size(); ++i) {
                dominance.offer(best.F[s][i], cur.F[s][i], s, i + 1);
                gaps[t][s].push_back(best.F[s][i] - cur.F[s][i]);
            }
            for (std::size_t i = 0; i < pot.f[s].size(); ++i) {
                const Rational& f = pot.f[s][i];
                nonneg.offer(f, Rational(0), s, i + 1);
                lower.offer(v_star[s] - v[s], gamma * f, s, i + 1);
                if (maximizers[t].empty() || f > f_hat[t]) {
                    f_hat[t] = f;
                    maximizers[t].assign(1, {s, i});
                } else if (f == f_hat[t]) {
                    maximizers[t].emplace_back(s, i);
                }
            }
        }
        report.lines.push_back(dominance.line(it, "F-dominance"));
        report.lines.push_back(nonneg.line(it, "potential-nonneg"));
        report.lines.push_back(lower.line(it, "lower-bound"));
        detail::Tightest upper;
        upper.offer(upper_factor * f_hat[t], detail::sup_gap(v_star, v));
        DiagnosticLine ul = upper.line(it, "upper-bound");
        std::swap(ul.lhs, ul.rhs);
        report.lines.push_back(ul);
    }

    for (std::size_t t = 0; t < T; ++t) {
        detail::Tightest halving;
        if (sgn(f_hat[t]) > 0) {
            for (auto [s, i] : maximizers[t]) {
                const Rational half = gaps[t][s][i] / 2;
                for (std::size_t l = t + L + 1; l < T; ++l)
                    halving.offer(half, gaps[l][s][i], s, i + 1);
            }
        }
        DiagnosticLine hl = halving.line(std::to_string(t), "halving");
        std::swap(hl.lhs, hl.rhs); // gap at l <= half the gap at t
        report.lines.push_back(hl);
    }

    std::size_t worst = 0;
    std::optional<std::size_t> worst_s, worst_i;
    for (std::size_t s = 0; s < n; ++s) {
        for (std::size_t i = 0; i < best.F[s].size(); ++i) {
            std::size_t drops = 0;
            for (std::size_t t = 0; t + 1 < T; ++t) {
                const Rational& a = gaps[t][s][i];
                const Rational& b = gaps[t + 1][s][i];
                if (sgn(a) <= 0)
                    continue;
                const long from = floor_log2(a);
                if (sgn(b) <= 0) {
                    report.events.push_back({s, i + 1, t, from, std::nullopt});
                    ++drops;
                } else if (floor_log2(b) < from) {
                    report.events.push_back({s, i + 1, t, from, floor_log2(b)});
                    ++drops;
                }
            }
            if (!worst_s || drops > worst) {
                worst = drops;
                worst_s = s;
                worst_i = i + 1;
            }
        }
    }
    DiagnosticLine count;
    count.iter = "all";
    count.check = "halving-count";
    count.lhs = Rational(static_cast<long>(worst));
    count.rhs = Rational(static_cast<long>(halving_ceiling(n)));
    count.state = worst_s;
    count.index = worst_i;
    count.status = worst <= halving_ceiling(n) ? CheckStatus::Pass : CheckStatus::Fail;
    report.lines.push_back(count);
    return report;
}

/**
 * RMDP-level checks on an outer trace: non-increasing values, decay, the
 * per-state lower bound v^sigma_s - v*_s >= gamma f(s, sigma(s)), the upper
 * bound ||v^sigma - v*|| <= gamma/(1-gamma) max_s f(s, sigma(s)), and
 * elimination of the maximizing action after ceil(log_gamma(1-gamma)) steps.
 * Potentials are handled pre-multiplied by gamma so a zero discount is fine.
 */
inline DiagnosticReport verify_rmdp_trace(const Rmdp& model, const RmdpSolveTrace& trace) {
    DiagnosticReport report;
    const std::size_t n = model.n_states();
    const std::size_t T = trace.policies.size();
    const Rational& gamma = model.discount;
    if (T == 0)
        return report;

    detail::value_sequence_lines(report, trace.values, trace.v_star, gamma, -1);

    // gamma * f(s,a) = q*(s,a) - q*(s, sigma*(s))
    const std::vector<Rational> q = q_values(model, trace.v_star);
    auto gf = [&](std::size_t s, std::size_t a) {
        return q[model.index(s, a)] - q[model.index(s, trace.sigma_star[s])];
    };

    const std::size_t L = ceil_log(gamma, 1 - gamma);
    for (std::size_t t = 0; t < T; ++t) {
        const std::string it = std::to_string(t);
        const AgentPolicy& sigma = trace.policies[t];
        detail::Tightest nonneg, lower;
        Rational gf_hat = 0;
        std::vector<std::size_t> argmax;
        for (std::size_t s = 0; s < n; ++s) {
            for (std::size_t a = 0; a < model.n_actions; ++a)
                nonneg.offer(gf(s, a), Rational(0), s, a);
            const Rational g = gf(s, sigma[s]);
            lower.offer(trace.values[t][s] - trace.v_star[s], g, s, sigma[s]);
            if (argmax.empty() || g > gf_hat) {
                gf_hat = g;
                argmax.assign(1, s);
            } else if (g == gf_hat) {
                argmax.push_back(s);
            }
        }
        report.lines.push_back(nonneg.line(it, "potential-nonneg"));
        report.lines.push_back(lower.line(it, "lower-bound"));
        detail::Tightest upper;
        upper.offer(gf_hat / (1 - gamma), detail::sup_gap(trace.values[t], trace.v_star));
        DiagnosticLine ul = upper.line(it, "upper-bound");
        std::swap(ul.lhs, ul.rhs);
        report.lines.push_back(ul);

        DiagnosticLine elim;
        elim.iter = it;
        elim.check = "action-elimination";
        elim.status = CheckStatus::Vacuous;
        if (sgn(gf_hat) > 0 && t + L + 1 < T) {
            elim.status = CheckStatus::Pass;
            for (auto s : argmax) {
                for (std::size_t k = t + L + 1; k < T; ++k) {
                    if (trace.policies[k][s] == sigma[s] && elim.status == CheckStatus::Pass) {
                        elim.status = CheckStatus::Fail;
                        elim.state = s;
                        elim.index = sigma[s];
                        elim.lhs = Rational(static_cast<long>(k));
                        elim.rhs = Rational(static_cast<long>(t + L));
                    }
                }
            }
        }
        report.lines.push_back(elim);
    }
    return report;
}

} // namespace robustpi
