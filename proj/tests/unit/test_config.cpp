#include "ergo/config.hpp"

#include <gtest/gtest.h>

using namespace ergo;

TEST(Config, RationalRoundTrip) {
    for (auto q : {make_rational(3, 8), make_rational(-7, 2), Rational(0), make_rational(BigInt("123456789012345678901234567890"), 7)}) {
        auto j = rational_to_json(q);
        EXPECT_TRUE(j["num"].is_string());
        EXPECT_TRUE(j["den"].is_string());
        EXPECT_EQ(rational_from_json(j), q);
        EXPECT_EQ(rational_from_json(json::parse(j.dump())), q);
    }
    EXPECT_EQ(rational_from_json(json("6/8")), make_rational(3, 4));
    EXPECT_EQ(rational_from_json(json(5)), Rational(5));
    EXPECT_EQ(rational_from_json(json{{"num", 2}, {"den", 4}}), make_rational(1, 2));
    EXPECT_THROW(rational_from_json(json{{"num", "1"}, {"den", "2"}, {"extra", 1}}), argument_error);
    EXPECT_THROW(rational_from_json(json(0.5)), argument_error);
    EXPECT_THROW(rational_from_json(json("1/0")), argument_error);
}

TEST(Config, CyclicSystemAndSet) {
    auto sys = system_from_json(json::parse(R"({"kind":"cyclic-rotation","params":{"m":5,"step":2}})"));
    ASSERT_TRUE(std::holds_alternative<CyclicRotation>(sys));
    const auto& c = std::get<CyclicRotation>(sys);
    auto A = set_from_json(c, json::parse(R"({"points":[0,3]})"));
    EXPECT_EQ(c.measure(A), make_rational(2, 5));
    EXPECT_EQ(c.measure(set_from_json(c, json::parse(R"({"whole":true})"))), Rational(1));
}

TEST(Config, UnknownFieldsRejected) {
    EXPECT_THROW(system_from_json(json::parse(R"({"kind":"cyclic-rotation","params":{"m":5,"stpe":2}})")), argument_error);
    EXPECT_THROW(system_from_json(json::parse(R"({"kind":"cyclic-rotation","parms":{}})")), argument_error);
    EXPECT_THROW(system_from_json(json::parse(R"({"kind":"no-such-kind"})")), argument_error);
    CircleRotation r(make_rational(1, 3));
    EXPECT_THROW(set_from_json(r, json::parse(R"({"arcs":[["0","1/2"]],"x":1})")), argument_error);
}

TEST(Config, CircleArcsMergeOverlaps) {
    auto sys = std::get<CircleRotation>(system_from_json(json::parse(R"({"kind":"circle-rotation-rational","params":{"angle":"1/4"}})")));
    auto A = set_from_json(sys, json::parse(R"({"arcs":[["0","1/2"],["1/4","3/4"],["7/8","1"]]})"));
    EXPECT_EQ(sys.measure(A), make_rational(7, 8));
}

TEST(Config, CylinderUnionIsDisjoint) {
    auto sys = std::get<BernoulliShift>(system_from_json(json::parse(R"({"kind":"bernoulli-shift","params":{"probs":["1/2","1/2"]}})")));
    // {w0=0} u {w1=0} has measure 3/4 regardless of overlap.
    auto A = set_from_json(sys, json::parse(R"({"cylinders":[[[0,0]],[[1,0]]]})"));
    EXPECT_EQ(sys.measure(A), make_rational(3, 4));
    EXPECT_THROW(set_from_json(sys, json::parse(R"({"cylinders":[[[0,2]]]})")), argument_error);
}

TEST(Config, MarkovAndProduct) {
    auto m = system_from_json(json::parse(R"({"kind":"markov-shift","params":{"matrix":[["9/10","1/10"],["1/10","9/10"]]}})"));
    EXPECT_TRUE(std::holds_alternative<MarkovShift>(m));
    auto p = system_from_json(json::parse(R"({"kind":"product","params":{
        "first":{"kind":"cyclic-rotation","params":{"m":2}},
        "second":{"kind":"cyclic-rotation","params":{"m":3}}}})"));
    using P = Product<CyclicRotation, CyclicRotation>;
    ASSERT_TRUE(std::holds_alternative<P>(p));
    const auto& prod = std::get<P>(p);
    auto A = set_from_json(prod, json::parse(R"({"rects":[[{"points":[0]},{"points":[0,1]}],[{"whole":true},{"points":[1]}]]})"));
    // {0}x{0,1} u Z2x{1}: 2 + 2 - 1 = 3 of 6 points.
    EXPECT_EQ(prod.measure(A), make_rational(1, 2));
    EXPECT_THROW(system_from_json(json::parse(R"({"kind":"product","params":{
        "first":{"kind":"cyclic-rotation","params":{"m":2}},
        "second":{"kind":"bernoulli-shift","params":{"probs":["1/2","1/2"]}}}})")),
                 argument_error);
}

TEST(Config, Relabeled) {
    auto s = system_from_json(json::parse(R"({"kind":"relabeled","params":{"m":4,"step":1,"relabel":[2,0,3,1]}})"));
    EXPECT_TRUE(std::holds_alternative<FinitePermutationSystem>(s));
}

TEST(Config, Observable) {
    CyclicRotation c(4, 1);
    auto f = observable_from_json(c, json::parse(R"({"terms":[{"coef":"1/2","set":{"points":[0]}},{"coef":"-1","set":{"points":[1,2]}}]})"));
    ASSERT_EQ(f.terms.size(), 2u);
    EXPECT_EQ(f.terms[0].first, make_rational(1, 2));
    auto g = observable_from_json(c, json::parse(R"({"points":[3]})"));
    ASSERT_EQ(g.terms.size(), 1u);
    EXPECT_EQ(g.terms[0].first, Rational(1));
}

TEST(Config, PairLists) {
    EXPECT_EQ(parse_pq_list("(1,0),(-1,1)"), (PQList{{1, 0}, {-1, 1}}));
    EXPECT_EQ(parse_pq_list(" ( 2 , 3 ) "), (PQList{{2, 3}}));
    EXPECT_EQ(parse_pq_list("[[1,0],[2,-1]]"), (PQList{{1, 0}, {2, -1}}));
    EXPECT_EQ(pq_from_json(json::parse("[[1,1]]")), (PQList{{1, 1}}));
    EXPECT_THROW(parse_pq_list("(1,0)(2,0)"), argument_error);
    EXPECT_THROW(parse_pq_list("1,0"), argument_error);
    EXPECT_THROW(parse_pq_list(""), argument_error);
}

TEST(Config, IntLists) {
    EXPECT_EQ(parse_int_list("16,64"), (std::vector<std::int64_t>{16, 64}));
    EXPECT_EQ(parse_int_list("1..4"), (std::vector<std::int64_t>{1, 2, 3, 4}));
    EXPECT_EQ(parse_int_list("2..10:4,20"), (std::vector<std::int64_t>{2, 6, 10, 20}));
    EXPECT_THROW(parse_int_list("5..1"), argument_error);
    EXPECT_THROW(parse_int_list("abc"), argument_error);
}

TEST(Config, LoadJsonInlineAndFile) {
    EXPECT_EQ(load_json(R"({"a":1})")["a"], 1);
    auto path = std::string(testing::TempDir()) + "/cfg_test.json";
    {
        std::ofstream f(path);
        f << R"({"b": [1,2]})";
    }
    EXPECT_EQ(load_json(path)["b"].size(), 2u);
    EXPECT_THROW(load_json("/nonexistent/file.json"), argument_error);
    EXPECT_THROW(load_json("{bad json"), argument_error);
}
