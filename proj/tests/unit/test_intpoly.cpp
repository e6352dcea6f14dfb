#include "ergo/intpoly.hpp"
#include "ergo/polyparse.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace ergo;

namespace {

// Independent evaluation path: monomial basis with rational arithmetic.
Rational eval_monomial(const MonomialPoly& p, long n, long N) {
    Rational total = 0;
    for (const auto& [k, c] : p) {
        Rational term = c;
        for (int i = 0; i < k.first; ++i) term *= n;
        for (int j = 0; j < k.second; ++j) term *= N;
        total += term;
    }
    return total;
}

IntPoly2 random_poly(std::mt19937_64& rng, int max_dn, int max_dN, int coef = 5) {
    std::uniform_int_distribution<int> c(-coef, coef);
    IntPoly2 p;
    for (int i = 0; i <= max_dn; ++i)
        for (int j = 0; j <= max_dN; ++j) p += IntPoly2::binom(i, j, c(rng));
    return p;
}

}  // namespace

TEST(IntPoly, EvalExamples) {
    EXPECT_EQ(IntPoly2::binom(2, 0).eval(5, 0), 10);
    EXPECT_EQ(IntPoly2().eval(17, -4), 0);
    EXPECT_EQ(IntPoly2::linear(3, 2).eval(4, 7), 26);
}

TEST(IntPoly, ParserAcceptsIntegerValued) {
    auto p = parse_intpoly("n*(n-1)/2");
    EXPECT_EQ(p, IntPoly2::binom(2, 0));
    EXPECT_EQ(parse_intpoly("3*n + 2*N"), IntPoly2::linear(3, 2));
    EXPECT_EQ(parse_intpoly("3n+2N"), IntPoly2::linear(3, 2));
    EXPECT_EQ(parse_intpoly("n^2 - n"), parse_intpoly("2*(n*(n-1)/2)"));
    EXPECT_EQ(parse_intpoly("n**3").eval(-3, 0), -27);
    EXPECT_TRUE(parse_intpoly("0").is_zero());
}

TEST(IntPoly, ParserRejectsNonIntegerValuedAndGarbage) {
    EXPECT_THROW(parse_intpoly("n/2"), argument_error);
    EXPECT_THROW(parse_intpoly("n*N/4"), argument_error);
    EXPECT_THROW(parse_intpoly("n/N"), argument_error);
    EXPECT_THROW(parse_intpoly("n +"), argument_error);
    EXPECT_THROW(parse_intpoly("(n"), argument_error);
    EXPECT_THROW(parse_intpoly("x"), argument_error);
}

TEST(IntPoly, ToStringRoundTripsThroughParser) {
    std::mt19937_64 rng(7);
    for (int t = 0; t < 50; ++t) {
        IntPoly2 p = random_poly(rng, 3, 2);
        EXPECT_EQ(parse_intpoly(p.to_string()), p) << p.to_string();
    }
}

// 1000 random polynomials: binomial-basis evaluation is integral and agrees
// with the rational monomial-basis evaluation.
TEST(IntPoly, BinomialBasisIntegrality) {
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<long> arg(-40, 40);
    for (int t = 0; t < 1000; ++t) {
        IntPoly2 p = random_poly(rng, 4, 3);
        MonomialPoly mono = p.to_monomial();
        long n = arg(rng), N = arg(rng);
        Rational via_mono = eval_monomial(mono, n, N);
        ASSERT_EQ(via_mono.get_den(), 1);
        ASSERT_EQ(p.eval(n, N), via_mono.get_num());
    }
}

TEST(IntPoly, CanonicalZero) {
    IntPoly2 p = IntPoly2::linear(2, 1) - IntPoly2::linear(2, 1);
    EXPECT_TRUE(p.is_zero());
    EXPECT_TRUE(p.coeffs().empty());
}

TEST(IntPoly, ShiftMatchesEvaluation) {
    std::mt19937_64 rng(3);
    for (int t = 0; t < 100; ++t) {
        IntPoly2 p = random_poly(rng, 4, 2);
        long h = static_cast<long>(rng() % 13) - 6;
        IntPoly2 s = p.shift_n(h);
        for (long n = -5; n <= 5; ++n) EXPECT_EQ(s.eval(n, 3), p.eval(n + h, 3));
    }
}

TEST(IntPoly, EssentiallyDistinct) {
    EXPECT_TRUE(is_essentially_distinct({parse_intpoly("n"), parse_intpoly("2n")}));
    EXPECT_FALSE(is_essentially_distinct({parse_intpoly("n+N"), parse_intpoly("n+N+1")}));
    EXPECT_TRUE(is_essentially_distinct({parse_intpoly("n+N"), parse_intpoly("n+2N")}));
    EXPECT_THROW(is_essentially_distinct({parse_intpoly("n")}), argument_error);
}

TEST(IntPoly, DependsOnN) {
    EXPECT_TRUE(depends_on_n(parse_intpoly("n*N")));
    EXPECT_FALSE(depends_on_n(parse_intpoly("N^2")));
    EXPECT_FALSE(depends_on_n(parse_intpoly("5")));
}

TEST(IntPoly, ShiftedDistinctnessExamples) {
    auto r1 = shifted_distinctness_report({parse_intpoly("n + N")}, 5);
    ASSERT_EQ(r1.exceptions.size(), 1u);
    EXPECT_EQ(r1.exceptions[0].difference, 5);
    EXPECT_TRUE(r1.ok());

    auto r2 = shifted_distinctness_report({parse_intpoly("n^2")}, 3);
    EXPECT_TRUE(r2.exceptions.empty());
    EXPECT_TRUE(r2.violations.empty());

    // P(n+2,N) - P(n,N) = 2N for P = nN: nonconstant.
    auto r3 = shifted_distinctness_report({parse_intpoly("n*N")}, 2);
    EXPECT_TRUE(r3.exceptions.empty());
    EXPECT_TRUE(r3.violations.empty());
}

TEST(IntPoly, ShiftedDistinctnessPreconditions) {
    EXPECT_THROW(shifted_distinctness_report({parse_intpoly("N")}, 1), argument_error);
    EXPECT_THROW(shifted_distinctness_report({parse_intpoly("7")}, 1), argument_error);
    EXPECT_THROW(shifted_distinctness_report({parse_intpoly("n"), parse_intpoly("n+1")}, 1), argument_error);
    EXPECT_THROW(shifted_distinctness_report({parse_intpoly("n")}, 0), argument_error);
}

TEST(IntPoly, ViolationAtSmallShiftAndMinimalShift) {
    // (n+1)^2 - (n^2 + 2n) = 1 is constant: h = 1 is too small.
    std::vector<IntPoly2> ps{parse_intpoly("n^2"), parse_intpoly("n^2 + 2n")};
    auto r = shifted_distinctness_report(ps, 1);
    ASSERT_EQ(r.violations.size(), 1u);
    EXPECT_EQ(r.violations[0].first, 1u);
    EXPECT_EQ(r.violations[0].second, 2u);
    EXPECT_EQ(r.violations[0].difference, 1);
    auto h = minimal_admissible_shift(ps);
    ASSERT_TRUE(h.has_value());
    EXPECT_EQ(*h, 2);
}

// Exceptions are exactly the members of the form p n + Q(N), for every h past the minimal one.
TEST(IntPoly, ExceptionsAreExactlyLinearMembers) {
    std::vector<IntPoly2> ps{parse_intpoly("n + N^2"), parse_intpoly("n^2 + n*N"), parse_intpoly("3n"),
                             parse_intpoly("n^3 - n")};
    auto h0 = minimal_admissible_shift(ps);
    ASSERT_TRUE(h0.has_value());
    for (long h = h0->get_si(); h < h0->get_si() + 20; ++h) {
        auto r = shifted_distinctness_report(ps, h);
        ASSERT_TRUE(r.ok());
        std::vector<std::size_t> linear;
        for (const auto& e : r.exceptions) linear.push_back(e.first);
        EXPECT_EQ(linear, (std::vector<std::size_t>{0, 2}));
        EXPECT_EQ(r.exceptions[1].difference, 3 * h);
    }
}

TEST(IntPoly, CountSmallValuesExamples) {
    auto a = count_small_values(parse_intpoly("n^2"), 4, 100);
    EXPECT_EQ(a.count, 2);
    ASSERT_TRUE(a.bound.has_value());
    EXPECT_EQ(*a.bound, 18);

    auto b = count_small_values(parse_intpoly("N"), 4, 10);
    EXPECT_EQ(b.count, 0);
    EXPECT_FALSE(b.bound.has_value());
    EXPECT_EQ(count_small_values(parse_intpoly("N"), 10, 10).count, 10);

    auto c = count_small_values(parse_intpoly("n"), 3, 10);
    EXPECT_EQ(c.count, 3);
    EXPECT_EQ(*c.bound, 7);
}

TEST(IntPoly, RootCountingBoundProperty) {
    std::mt19937_64 rng(2024);
    for (int t = 0; t < 200; ++t) {
        IntPoly2 p = random_poly(rng, 1 + static_cast<int>(rng() % 4), 2, 3);
        if (!p.depends_on_n()) continue;
        long K = static_cast<long>(rng() % 21);
        long N = 1 + static_cast<long>(rng() % 2000);
        auto r = count_small_values(p, K, N);
        ASSERT_LE(r.count, *r.bound) << p.to_string() << " K=" << K << " N=" << N;
    }
}

TEST(IntPoly, SmallValueDensityTendsToZero) {
    IntPoly2 p = parse_intpoly("n - N");
    BigInt K = 50;
    auto big = count_small_values(p, K, 100000);
    EXPECT_LT(static_cast<double>(big.count) / 100000.0, 1e-3);
    // Ratio is non-increasing once every small value has been seen.
    double prev = 1.0;
    for (long N : {1000L, 5000L, 20000L, 100000L}) {
        double ratio = static_cast<double>(count_small_values(p, K, N).count) / static_cast<double>(N);
        EXPECT_LE(ratio, prev);
        prev = ratio;
    }
}
