#include "robustpi/oracles.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

using namespace robustpi;
using rtest::Q;
using rtest::Qs;

namespace {

Rational objective(const StructuredDistribution& w, const std::vector<Rational>& v) { return dot(w.p, v); }

} // namespace

TEST(Oracles, SortedViewTieBreak) {
    SortedSuccessorView view(Qs({"1", "3", "1", "3"}));
    EXPECT_EQ(view.order(), (std::vector<std::size_t>{1, 3, 0, 2}));
    SortedSuccessorView keyed(Qs({"1", "3", "1", "3"}), {9, 7, 2, 8});
    EXPECT_EQ(keyed.order(), (std::vector<std::size_t>{1, 3, 2, 0}));
}

TEST(Oracles, L1Examples) {
    auto nominal = Qs({"1/2", "1/2"});
    auto w = l1_worst_case(nominal, Qs({"1", "0"}), Q("0"));
    EXPECT_EQ(w.p, nominal);

    w = l1_worst_case(nominal, Qs({"1", "0"}), Q("1/2"));
    EXPECT_EQ(w.p, Qs({"3/4", "1/4"}));
    EXPECT_EQ(check_l1_structure(nominal, Q("1/2"), w), "");

    w = l1_worst_case(Qs({"1/5", "4/5"}), Qs({"1", "0"}), Q("1"));
    EXPECT_EQ(w.p, Qs({"7/10", "3/10"}));

    auto flat = Qs({"2", "2", "2"});
    auto nom3 = Qs({"1/6", "1/3", "1/2"});
    w = l1_worst_case(nom3, flat, Q("1"));
    EXPECT_EQ(objective(w, flat), dot(nom3, flat));

    EXPECT_THROW(l1_worst_case(nominal, Qs({"1"}), Q("0")), ModelError);
    EXPECT_THROW(l1_worst_case(nominal, Qs({"1", "0"}), Q("-1")), ModelError);
}

TEST(Oracles, L1ReceiverCapsAtOne) {
    auto nominal = Qs({"1/4", "1/4", "1/2"});
    auto w = l1_worst_case(nominal, Qs({"3", "2", "1"}), Q("2"));
    EXPECT_EQ(w.p, Qs({"1", "0", "0"}));
    EXPECT_EQ(check_l1_structure(nominal, Q("2"), w), "");
}

TEST(Oracles, LinfExamples) {
    auto nominal = Qs({"1/3", "1/3", "1/3"});
    auto w = linf_worst_case(nominal, Qs({"2", "1", "0"}), Q("0"));
    EXPECT_EQ(w.p, nominal);

    w = linf_worst_case(nominal, Qs({"2", "1", "0"}), Q("1/4"));
    EXPECT_EQ(w.p, Qs({"7/12", "1/3", "1/12"}));
    EXPECT_EQ(check_linf_structure(nominal, Q("1/4"), w), "");

    w = linf_worst_case(nominal, Qs({"0", "5", "1"}), Q("1"));
    EXPECT_EQ(w.p, Qs({"0", "1", "0"}));
    EXPECT_EQ(check_linf_structure(nominal, Q("1"), w), "");
}

TEST(Oracles, BruteForceMatchesHandExamples) {
    EXPECT_EQ(brute_force_worst_case(Qs({"1/2", "1/2"}), Qs({"1", "0"}), Q("1/2"), Norm::l1()), Q("3/4"));
    EXPECT_EQ(brute_force_worst_case(Qs({"1/5", "4/5"}), Qs({"1", "0"}), Q("1"), Norm::l1()), Q("7/10"));
    EXPECT_EQ(brute_force_worst_case(Qs({"1/3", "1/3", "1/3"}), Qs({"2", "1", "0"}), Q("1/4"), Norm::linf()),
              Q("7/12") * 2 + Q("1/3"));
    auto nominal = Qs({"1/6", "1/3", "1/2"});
    auto flat = Qs({"3", "3", "3"});
    EXPECT_EQ(brute_force_worst_case(nominal, flat, Q("1"), Norm::l1()), Q("3"));
    EXPECT_EQ(brute_force_worst_case(nominal, Qs({"1", "2", "3"}), Q("0"), Norm::linf()),
              dot(nominal, Qs({"1", "2", "3"})));
    EXPECT_THROW(brute_force_worst_case(std::vector<Rational>(7, Q("1/7")), std::vector<Rational>(7, Q("0")), Q("0"),
                                        Norm::l1()),
                 UnsupportedError);
}

class OracleEquivalence : public ::testing::TestWithParam<NormKind> {};

TEST_P(OracleEquivalence, RandomInstancesMatchBruteForce) {
    const Norm norm = GetParam() == NormKind::L1 ? Norm::l1() : Norm::linf();
    std::mt19937_64 rng(GetParam() == NormKind::L1 ? 101 : 202);
    std::uniform_int_distribution<std::size_t> dim(1, 5);
    std::uniform_int_distribution<int> small(0, 3);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t d = dim(rng);
        auto nominal = rtest::random_distribution(rng, d);
        std::vector<Rational> values(d);
        for (auto& v : values)
            v = small(rng) == 0 ? Q("1") : rtest::random_rational(rng, -3, 3, 4);
        const Rational radius = rtest::random_rational(rng, 0, 1, 8) * (trial % 7 == 0 ? 3 : 1);
        auto w = norm.kind == NormKind::L1 ? l1_worst_case(nominal, values, radius)
                                           : linf_worst_case(nominal, values, radius);
        EXPECT_TRUE(is_feasible(UncertaintySet{nominal, radius, norm}, w.p));
        EXPECT_EQ(objective(w, values), brute_force_worst_case(nominal, values, radius, norm))
            << "trial " << trial;
        const std::string why = norm.kind == NormKind::L1 ? check_l1_structure(nominal, radius, w)
                                                          : check_linf_structure(nominal, radius, w);
        EXPECT_EQ(why, "") << "trial " << trial;
    }
}

INSTANTIATE_TEST_SUITE_P(Norms, OracleEquivalence, ::testing::Values(NormKind::L1, NormKind::LInf));

TEST(Oracles, TieInvariance) {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 100; ++trial) {
        auto nominal = rtest::random_distribution(rng, 5);
        auto values = Qs({"1", "2", "2", "0", "2"});
        const Rational radius = rtest::random_rational(rng, 0, 1, 6);
        for (auto norm : {Norm::l1(), Norm::linf()}) {
            auto run = [&](const std::vector<std::size_t>& keys) {
                return norm.kind == NormKind::L1 ? l1_worst_case(nominal, values, radius, keys)
                                                 : linf_worst_case(nominal, values, radius, keys);
            };
            auto a = run({0, 1, 2, 3, 4});
            auto b = run({0, 4, 2, 3, 1});
            EXPECT_EQ(objective(a, values), objective(b, values));
        }
    }
}

TEST(Oracles, BellmanBasics) {
    Rmc c;
    c.discount = Q("1/2");
    c.cost = Qs({"0", "1", "0"});
    c.rows.resize(3);
    c.rows[0].successors = {1, 2};
    c.rows[0].uncertainty = {Qs({"1/2", "1/2"}), Q("1/2"), Norm::l1()};
    c.rows[1].successors = {1};
    c.rows[1].uncertainty.nominal = Qs({"1"});
    c.rows[2].successors = {2};
    c.rows[2].uncertainty.nominal = Qs({"1"});

    EXPECT_EQ(apply_bellman(c, Qs({"0", "0", "0"})), c.cost);
    auto fixed = apply_bellman(c, Qs({"3/4", "2", "0"}));
    EXPECT_EQ(fixed, Qs({"3/4", "2", "0"}));

    auto v0 = Qs({"5", "-1", "3"});
    auto v1 = apply_bellman(c, v0);
    auto v2 = apply_bellman(c, v1);
    EXPECT_LE(sup_distance(v2, v1), c.discount * sup_distance(v1, v0));

    c.rows[0].uncertainty.norm = Norm::lp(2);
    EXPECT_THROW(apply_bellman(c, v0), UnsupportedError);
}

TEST(Oracles, BellmanContractionAndMonotone) {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 40; ++trial) {
        const Norm norm = trial % 2 ? Norm::l1() : Norm::linf();
        auto model = rtest::random_rmdp(rng, 6, 2, Q("3/4"), rtest::random_rational(rng, 0, 1, 5), norm, 4);
        ValueVector u(6), v(6);
        for (std::size_t s = 0; s < 6; ++s) {
            u[s] = rtest::random_rational(rng, -4, 4, 3);
            v[s] = rtest::random_rational(rng, -4, 4, 3);
        }
        auto tu = apply_bellman(model, u);
        auto tv = apply_bellman(model, v);
        EXPECT_LE(sup_distance(tu, tv), model.discount * sup_distance(u, v));

        ValueVector w = u;
        for (std::size_t s = 0; s < 6; ++s)
            w[s] += rtest::random_rational(rng, 0, 2, 3);
        auto tw = apply_bellman(model, w);
        for (std::size_t s = 0; s < 6; ++s)
            EXPECT_LE(tu[s], tw[s]);
    }
}
