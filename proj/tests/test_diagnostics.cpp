#include "robustpi/benchmarks.hpp"
#include "robustpi/diagnostics.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace robustpi;
using rtest::Q;
using rtest::Qs;

namespace {

Rmc three_state() {
    Rmc c;
    c.discount = Q("1/2");
    c.cost = Qs({"0", "1", "0"});
    c.rows.resize(3);
    c.rows[0].successors = {1, 2};
    c.rows[0].uncertainty.nominal = Qs({"1/2", "1/2"});
    for (std::size_t s : {1u, 2u}) {
        c.rows[s].successors = {s};
        c.rows[s].uncertainty.nominal = Qs({"1"});
    }
    for (auto& r : c.rows)
        r.uncertainty.radius = Q("1/2");
    return c;
}

const DiagnosticLine* find_line(const DiagnosticReport& r, const std::string& iter, const std::string& check) {
    for (const auto& l : r.lines)
        if (l.iter == iter && l.check == check)
            return &l;
    return nullptr;
}

} // namespace

TEST(Diagnostics, ThreeStateTables) {
    auto chain = three_state();
    auto t = rmc_policy_iteration(chain);
    auto best = cumulative_gaps(chain, t.v_star, t.tau_star);
    auto nominal = cumulative_gaps(chain, t.v_star, nominal_policy(chain.rows));
    EXPECT_EQ(best.F[0], Qs({"3/4", "1"}));
    EXPECT_EQ(nominal.F[0], Qs({"1/2", "1"}));
    auto pot = potentials(chain, t.v_star, best, nominal);
    // (3/4 - 1/2) * (2 - 0)
    EXPECT_EQ(pot.f[0], Qs({"1/2"}));
    EXPECT_TRUE(pot.f[1].empty());

    auto report = verify_trace(chain, t);
    EXPECT_EQ(report.violations(), 0u) << report.to_text();
    const auto* lower = find_line(report, "0", "lower-bound");
    ASSERT_NE(lower, nullptr);
    EXPECT_EQ(lower->status, CheckStatus::Pass);
    EXPECT_EQ(lower->lhs, Q("1/4")); // v*_0 - v_0 = 3/4 - 1/2
    EXPECT_EQ(lower->rhs, Q("1/4")); // gamma * f = 1/2 * 1/2
    const auto* upper = find_line(report, "0", "upper-bound");
    ASSERT_NE(upper, nullptr);
    EXPECT_EQ(upper->lhs, Q("1/4"));
    EXPECT_EQ(upper->rhs, Q("3/2")); // (1/2 * 3 / (1/2)) * 1/2
    EXPECT_EQ(report.events.size(), 1u);
    EXPECT_EQ(report.events[0].state, 0u);
    EXPECT_FALSE(report.events[0].to_msb.has_value());
}

TEST(Diagnostics, ZeroRadiusHasNoGaps) {
    auto chain = three_state();
    for (auto& r : chain.rows)
        r.uncertainty.radius = 0;
    auto t = rmc_policy_iteration(chain);
    auto best = cumulative_gaps(chain, t.v_star, t.tau_star);
    auto cur = cumulative_gaps(chain, t.v_star, t.policies.front());
    EXPECT_EQ(best.F, cur.F);
    auto report = verify_trace(chain, t);
    EXPECT_EQ(report.violations(), 0u);
    EXPECT_TRUE(report.events.empty());
}

TEST(Diagnostics, OptimalStartHasNoEvents) {
    auto chain = three_state();
    auto t = rmc_policy_iteration(chain);
    auto again = rmc_policy_iteration(chain, t.tau_star);
    EXPECT_EQ(again.iterations, 1u);
    auto report = verify_trace(chain, again);
    EXPECT_TRUE(report.events.empty());
    EXPECT_EQ(report.violations(), 0u);
}

TEST(Diagnostics, ReportsCorruptedTrace) {
    auto chain = three_state();
    auto t = rmc_policy_iteration(chain);
    std::swap(t.values.front(), t.values.back());
    auto report = verify_trace(chain, t);
    EXPECT_GT(report.violations(), 0u);
    EXPECT_NE(report.to_text().find("FAIL"), std::string::npos);
}

TEST(Diagnostics, TextFormat) {
    auto chain = three_state();
    auto report = verify_trace(chain, rmc_policy_iteration(chain));
    const std::string text = report.to_text();
    EXPECT_NE(text.find("0, lower-bound, pass, (0,1), 1/4, 1/4\n"), std::string::npos) << text;
    EXPECT_NE(text.find("all, halving-count, pass, "), std::string::npos);
}

class DiagnosticsRandom : public ::testing::TestWithParam<int> {};

TEST_P(DiagnosticsRandom, NoViolations) {
    const Norm norm = GetParam() == 0 ? Norm::l1() : Norm::linf();
    std::mt19937_64 rng(300 + GetParam());
    const Rational gammas[] = {Q("1/2"), Q("9/10")};
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t n = 3 + static_cast<std::size_t>(trial % 5);
        auto chain = rtest::random_rmc(rng, n, gammas[trial % 2], rtest::random_rational(rng, 0, 1, 4), norm, 5);
        auto t = rmc_policy_iteration(chain);
        auto report = verify_trace(chain, t);
        EXPECT_EQ(report.violations(), 0u) << report.to_text();
        auto table = cumulative_gaps(chain, t.v_star, t.policies.front());
        for (const auto& row : table.F) {
            for (std::size_t i = 1; i < row.size(); ++i)
                EXPECT_LE(row[i - 1], row[i]);
            EXPECT_EQ(row.back(), 1);
        }
    }
}

INSTANTIATE_TEST_SUITE_P(BothNorms, DiagnosticsRandom, ::testing::Values(0, 1));

TEST(Diagnostics, BenchmarkRmdpTraces) {
    for (auto kind : {BenchmarkKind::Gridworld, BenchmarkKind::MachineReplacement, BenchmarkKind::Garnet}) {
        BenchmarkSpec spec;
        spec.kind = kind;
        spec.size = 9;
        spec.radius = Q("1/20");
        auto model = make_benchmark(spec);
        auto t = rmdp_policy_iteration(model, benchmark_initial_policy(kind, model));
        auto report = verify_rmdp_trace(model, t);
        EXPECT_EQ(report.violations(), 0u) << to_string(kind) << "\n" << report.to_text();
        for (std::size_t i = 0; i < t.inner.size(); ++i) {
            auto inner = verify_trace(induce_rmc(model, t.policies[i]), t.inner[i]);
            EXPECT_EQ(inner.violations(), 0u) << inner.to_text();
        }
    }
}
