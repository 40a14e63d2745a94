#include "robustpi/linalg.hpp"
#include "robustpi/model.hpp"
#include "robustpi/model_io.hpp"
#include "robustpi/oracles.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

using namespace robustpi;
using rtest::Q;
using rtest::Qs;

namespace {

Rmc two_state_chain() {
    Rmc c;
    c.discount = Q("1/2");
    c.cost = Qs({"1", "0"});
    c.rows.resize(2);
    c.rows[0].successors = {0, 1};
    c.rows[0].uncertainty.nominal = Qs({"1/2", "1/2"});
    c.rows[1].successors = {1};
    c.rows[1].uncertainty.nominal = Qs({"1"});
    return c;
}

} // namespace

TEST(Rational, ParseCanonicalizes) {
    EXPECT_EQ(to_string(parse_rational("2/4")), "1/2");
    EXPECT_EQ(to_string(parse_rational("-6/3")), "-2/1");
    EXPECT_EQ(to_string(parse_rational("7")), "7/1");
    EXPECT_EQ(to_string(parse_rational("0/5")), "0/1");
}

TEST(Rational, ParseRejectsMalformed) {
    EXPECT_THROW(parse_rational("1/0"), ModelError);
    EXPECT_THROW(parse_rational("1/-2"), ModelError);
    EXPECT_THROW(parse_rational("a/2"), ModelError);
    EXPECT_THROW(parse_rational(""), ModelError);
    EXPECT_THROW(parse_rational("0.5"), ModelError);
}

TEST(Rational, Logs) {
    EXPECT_EQ(floor_log2(Q("1")), 0);
    EXPECT_EQ(floor_log2(Q("3/4")), -1);
    EXPECT_EQ(floor_log2(Q("1/2")), -1);
    EXPECT_EQ(floor_log2(Q("7")), 2);
    EXPECT_EQ(floor_log2(Q("8")), 3);
    EXPECT_EQ(floor_log2(Q("1/3")), -2);
    EXPECT_EQ(ceil_log2(1), 0u);
    EXPECT_EQ(ceil_log2(5), 3u);
    EXPECT_EQ(ceil_log2(8), 3u);
    // (1/2)^L <= 1/2 -> 1; (9/10)^L <= 1/10 -> 22
    EXPECT_EQ(ceil_log(Q("1/2"), Q("1/2")), 1u);
    EXPECT_EQ(ceil_log(Q("9/10"), Q("1/10")), 22u);
    EXPECT_EQ(ceil_log(Q("0"), Q("1/10")), 1u);
}

TEST(Rational, DecimalRendering) {
    EXPECT_EQ(to_decimal(Q("1/20")), "0.05");
    EXPECT_EQ(to_decimal(Q("-25/2")), "-12.5");
    EXPECT_EQ(to_decimal(Q("1/3")), "0.333333333333");
    EXPECT_EQ(to_decimal(Q("2/3")), "0.666666666667");
    EXPECT_EQ(to_decimal(Q("1000")), "1000");
    // half-even at the 12th digit
    EXPECT_EQ(to_decimal(Q("1000000000025/10")), "100000000002");
    EXPECT_EQ(to_decimal(Q("1000000000035/10")), "100000000004");
    EXPECT_EQ(to_decimal(Q("123456789012345")), "123456789012000");
}

TEST(Model, ValidateAcceptsWellFormed) {
    EXPECT_TRUE(validate_rmc(two_state_chain()).empty());
    EXPECT_TRUE(validate_rmdp(as_rmdp(two_state_chain())).empty());
}

TEST(Model, ValidateReportsViolations) {
    Rmc c = two_state_chain();
    c.rows[0].uncertainty.nominal = Qs({"1/2", "1/3"});
    auto v = validate_rmdp(as_rmdp(c));
    ASSERT_EQ(v.size(), 1u);
    EXPECT_NE(v[0].find("sum != 1 at (0,0)"), std::string::npos);

    Rmc d = two_state_chain();
    d.discount = 1;
    auto w = validate_rmc(d);
    ASSERT_EQ(w.size(), 1u);
    EXPECT_NE(w[0].find("discount out of range"), std::string::npos);

    Rmc e = two_state_chain();
    e.rows[0].successors = {1, 1};
    EXPECT_FALSE(validate_rmc(e).empty());
    e.rows[0].successors = {0, 5};
    EXPECT_FALSE(validate_rmc(e).empty());
    e.rows[0].successors = {};
    EXPECT_FALSE(validate_rmc(e).empty());
}

TEST(Model, FeasibilityIsExact) {
    UncertaintySet l1{Qs({"1/2", "1/2"}), Q("1/2"), Norm::l1()};
    EXPECT_TRUE(is_feasible(l1, Qs({"3/4", "1/4"})));
    EXPECT_FALSE(is_feasible(l1, Qs({"751/1000", "249/1000"})));
    UncertaintySet linf{Qs({"1/3", "1/3", "1/3"}), Q("1/4"), Norm::linf()};
    EXPECT_TRUE(is_feasible(linf, Qs({"7/12", "1/3", "1/12"})));
    EXPECT_FALSE(is_feasible(linf, Qs({"2/3", "1/3", "0"})));
    UncertaintySet l2{Qs({"1/2", "1/2"}), Q("1/2"), Norm::lp(2)};
    // |d|^2 * 2 <= 1/4  <=>  |d| <= sqrt(1/8)
    EXPECT_TRUE(is_feasible(l2, Qs({"3/4", "1/4"})));
    EXPECT_FALSE(is_feasible(l2, Qs({"9/10", "1/10"})));
}

TEST(Model, InduceRmcPicksRows) {
    Rmdp m;
    m.n_actions = 2;
    m.discount = Q("1/2");
    m.cost = Qs({"1", "2"});
    for (std::size_t s = 0; s < 2; ++s) {
        for (std::size_t a = 0; a < 2; ++a) {
            Row r;
            r.successors = {a};
            r.uncertainty.nominal = Qs({"1"});
            r.uncertainty.radius = Rational(static_cast<long>(s * 2 + a), 10);
            r.uncertainty.radius.canonicalize();
            m.rows.push_back(r);
        }
    }
    Rmc c = induce_rmc(m, {1, 0});
    EXPECT_EQ(c.rows[0].successors, std::vector<std::size_t>{1});
    EXPECT_EQ(c.rows[0].uncertainty.radius, Q("1/10"));
    EXPECT_EQ(c.rows[1].successors, std::vector<std::size_t>{0});
    EXPECT_EQ(c.rows[1].uncertainty.radius, Q("2/10"));
    EXPECT_EQ(c.cost, m.cost);
    EXPECT_THROW(induce_rmc(m, {2, 0}), ModelError);
    EXPECT_THROW(induce_rmc(m, {0}), ModelError);
}

TEST(Model, BatchRmcLayout) {
    Rmc c = two_state_chain();
    auto batch = build_batch_rmc(as_rmdp(c), Qs({"4/3", "2/3"}));
    ASSERT_EQ(batch.chain.n_states(), 4u);
    EXPECT_EQ(batch.transient(1, 0), 1u);
    EXPECT_EQ(batch.absorbing(0), 2u);
    EXPECT_TRUE(validate_rmc(batch.chain).empty());
    EXPECT_EQ(batch.chain.cost[2], Q("2/3"));
    EXPECT_THROW(build_batch_rmc(as_rmdp(c), Qs({"1"})), ModelError);

    // absorbing copy has exactly the supplied value; one-row degenerate oracle
    auto v = policy_value(batch.chain, nominal_policy(batch.chain.rows));
    EXPECT_EQ(v[2], Q("4/3"));
    EXPECT_EQ(v[3], Q("2/3"));
    EXPECT_EQ(v[1], Q("1/3"));
}

TEST(Model, BatchRmcMatchesOracleOnThreeSuccessors) {
    Rmdp m;
    m.n_actions = 1;
    m.discount = Q("1/2");
    m.cost = Qs({"1", "0", "0", "0"});
    Row r;
    r.successors = {1, 2, 3};
    r.uncertainty = {Qs({"1/3", "1/3", "1/3"}), Q("1/4"), Norm::l1()};
    m.rows.push_back(r);
    for (std::size_t s = 1; s < 4; ++s) {
        Row loop;
        loop.successors = {s};
        loop.uncertainty.nominal = Qs({"1"});
        m.rows.push_back(loop);
    }
    const ValueVector values = Qs({"0", "5", "-1", "2"});
    auto batch = build_batch_rmc(m, values);
    // the batch chain's transient rows are one-step; the robust optimum in
    // the worst case equals one oracle call against the absorbing values
    auto w = l1_worst_case(r.uncertainty.nominal, Qs({"5", "-1", "2"}), r.uncertainty.radius);
    Rational expected = Q("1") + Q("1/2") * dot(w.p, Qs({"5", "-1", "2"}));
    AdversaryPolicy tau = nominal_policy(batch.chain.rows);
    tau[batch.transient(0, 0)] = w.p;
    auto v = policy_value(batch.chain, tau);
    EXPECT_EQ(v[batch.transient(0, 0)], expected);
}

TEST(ModelIo, RoundTripIsByteIdentical) {
    Rmdp m = as_rmdp(two_state_chain());
    m.rows[0].uncertainty.radius = Q("1/20");
    m.rows[0].uncertainty.norm = Norm::linf();
    const std::string text = serialize_model(m);
    const std::string again = serialize_model(parse_model(text));
    EXPECT_EQ(text, again);
    EXPECT_NE(text.find("\"discount\": \"1/2\""), std::string::npos);

    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        auto r = rtest::random_rmdp(rng, 5, 3, Q("9/10"), Q("1/7"), trial % 2 ? Norm::l1() : Norm::lp(3));
        r.action_cost.assign(r.rows.size(), Q("0"));
        r.action_cost[trial % r.rows.size()] = Q("-3/8");
        const std::string t1 = serialize_model(r);
        const Rmdp back = parse_model(t1);
        EXPECT_TRUE(validate_rmdp(back).empty());
        EXPECT_EQ(serialize_model(back), t1);
    }
}

TEST(ModelIo, ErrorsCarryLocation) {
    const std::string bad = R"({"states": 1, "actions": 1, "discount": "1/2", "cost": ["1/0"],
        "transitions": [{"state": 0, "action": 0, "successors": [0], "nominal": ["1/1"],
        "radius": "0/1", "norm": "l1"}]})";
    try {
        parse_model(bad);
        FAIL() << "expected a parse error";
    } catch (const ModelError& e) {
        EXPECT_NE(std::string(e.what()).find("$.cost[0]"), std::string::npos);
        EXPECT_NE(std::string(e.what()).find("zero denominator"), std::string::npos);
    }
    EXPECT_THROW(parse_model("{ not json"), ModelError);
    const std::string missing = R"({"states": 2, "actions": 1, "discount": "1/2", "cost": ["1/1", "0/1"],
        "transitions": [{"state": 0, "action": 0, "successors": [0], "nominal": ["1/1"],
        "radius": "0/1", "norm": "l1"}]})";
    EXPECT_THROW(parse_model(missing), ModelError);
}
