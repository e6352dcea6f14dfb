#include "ergo/systems.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

using namespace ergo;

namespace {

Rational q(long a, long b = 1) { return make_rational(a, b); }

// Independent arc oracle: with Q a common denominator of every endpoint, each
// cell [i/Q, (i+1)/Q) lies inside or outside the set; count cells by midpoint.
Rational grid_measure(const ArcSet& s, long Q) {
    long inside = 0;
    for (long i = 0; i < Q; ++i)
        if (s.contains(make_rational(2 * i + 1, 2 * Q))) ++inside;
    return make_rational(inside, Q);
}

ArcSet random_arcs(std::mt19937_64& rng, long den) {
    std::vector<ArcSet::Arc> arcs;
    int count = 1 + static_cast<int>(rng() % 3);
    for (int i = 0; i < count; ++i)
        arcs.emplace_back(make_rational(static_cast<long>(rng() % (den + 1)), den), make_rational(static_cast<long>(rng() % (den + 1)), den));
    return ArcSet::from_arcs(arcs);
}

template <class Sys>
typename Sys::set_type random_cylinder_union(const Sys& sys, std::mt19937_64& rng) {
    auto s = sys.empty_set();
    int pieces = 1 + static_cast<int>(rng() % 3);
    for (int p = 0; p < pieces; ++p) {
        std::vector<std::pair<std::int64_t, int>> cons;
        int len = 1 + static_cast<int>(rng() % 3);
        for (int i = 0; i < len; ++i)
            cons.emplace_back(static_cast<std::int64_t>(rng() % 7) - 3, static_cast<int>(rng() % sys.alphabet()));
        try {
            auto c = sys.cylinder(cons);
            // Union via complements keeps the representation disjoint.
            s = sys.complement(sys.intersect(sys.complement(s), sys.complement(c)));
        } catch (const argument_error&) {
        }
    }
    return s;
}

// Markov oracle: sum stationary path probabilities over every word on the span.
Rational markov_brute(const MarkovShift& m, const CylinderSet<std::int64_t>& s) {
    std::int64_t lo = 0, hi = -1;
    bool any = false;
    for (const auto& c : s.pieces())
        for (const auto& [coord, sym] : c.fixed) {
            if (!any) lo = hi = coord, any = true;
            lo = std::min(lo, coord);
            hi = std::max(hi, coord);
        }
    if (!any) return s.empty() ? Rational(0) : Rational(1);
    const int A = m.alphabet();
    const std::int64_t L = hi - lo + 1;
    std::vector<int> w(static_cast<std::size_t>(L), 0);
    Rational total = 0;
    for (;;) {
        auto at = [&](std::int64_t c) { return w[static_cast<std::size_t>(c - lo)]; };
        if (s.contains_word(at)) {
            Rational p = m.stationary_vector()[static_cast<std::size_t>(w[0])];
            for (std::int64_t i = 1; i < L; ++i) p *= m.transition()[static_cast<std::size_t>(w[i - 1])][static_cast<std::size_t>(w[i])];
            total += p;
        }
        std::int64_t i = 0;
        while (i < L && ++w[static_cast<std::size_t>(i)] == A) w[static_cast<std::size_t>(i++)] = 0;
        if (i == L) break;
    }
    return total;
}

MarkovShift stay_chain(const Rational& stay) {
    return MarkovShift({{stay, 1 - stay}, {1 - stay, stay}});
}

}  // namespace

TEST(Circle, SpecExamples) {
    CircleRotation half(q(1, 2));
    auto A = half.arc(0, q(1, 4));
    EXPECT_EQ(half.measure(A), q(1, 4));
    EXPECT_EQ(half.preimage(A, 1), half.arc(q(1, 2), q(3, 4)));
    EXPECT_EQ(half.preimage(A, 0), A);
    EXPECT_TRUE(half.is_empty(half.intersect(A, half.arc(q(1, 2), q(3, 4)))));
}

TEST(Circle, WrapAroundArcsSplitAtZero) {
    auto s = ArcSet::arc(q(3, 4), q(1, 4));
    ASSERT_EQ(s.arcs().size(), 2u);
    EXPECT_EQ(s.length(), q(1, 2));
    EXPECT_TRUE(s.contains(q(0)));
    EXPECT_FALSE(s.contains(q(1, 4)));
    EXPECT_EQ(~s, ArcSet::arc(q(1, 4), q(3, 4)));
}

TEST(Circle, InvarianceAndHomomorphismAgainstGridOracle) {
    std::mt19937_64 rng(1);
    CircleRotation rot(q(3, 7));
    for (int t = 0; t < 200; ++t) {
        auto S = random_arcs(rng, 12);
        long k = static_cast<long>(rng() % 101) - 50;
        long b = static_cast<long>(rng() % 21) - 10;
        auto P = rot.preimage(S, k);
        EXPECT_EQ(rot.measure(P), rot.measure(S));
        EXPECT_EQ(rot.measure(S), grid_measure(S, 12));
        EXPECT_EQ(rot.measure(P), grid_measure(P, 84));
        EXPECT_EQ(rot.preimage(S, k + b), rot.preimage(rot.preimage(S, k), b));
        auto U = random_arcs(rng, 12);
        EXPECT_EQ(rot.measure(rot.intersect(S, U)), grid_measure(S & U, 12));
        EXPECT_EQ(rot.measure(rot.complement(S)), 1 - rot.measure(S));
    }
}

TEST(Circle, HalfRotationIsTwoPeriodic) {
    CircleRotation half(q(1, 2));
    auto A = half.arc(0, q(1, 4));
    for (long n = 0; n < 40; ++n)
        EXPECT_EQ(half.measure(half.intersect(A, half.preimage(A, n))), n % 2 == 0 ? q(1, 4) : q(0));
}

TEST(Cyclic, PreimageFollowsTheMap) {
    CyclicRotation z4(4);
    // T x = x + 1, so T^{-3}{0} = {x : x + 3 = 0 mod 4} = {1}.
    EXPECT_EQ(z4.preimage(z4.points({0}), 3), z4.points({1}));
    EXPECT_EQ(z4.preimage(z4.points({0}), -1), z4.points({1}));
    EXPECT_EQ(z4.preimage(z4.points({2}), 0), z4.points({2}));
    EXPECT_EQ(z4.measure(z4.points({0, 3})), q(1, 2));
}

TEST(Cyclic, InvarianceAndHomomorphism) {
    std::mt19937_64 rng(2);
    CyclicRotation z(9, 2);
    for (int t = 0; t < 200; ++t) {
        std::vector<std::int64_t> pts;
        for (int i = 0; i < 9; ++i)
            if (rng() & 1) pts.push_back(i);
        auto S = z.points(pts);
        long k = static_cast<long>(rng() % 101) - 50, b = static_cast<long>(rng() % 11) - 5;
        EXPECT_EQ(z.measure(z.preimage(S, k)), z.measure(S));
        EXPECT_EQ(z.preimage(S, k + b), z.preimage(z.preimage(S, k), b));
        for (std::int64_t x = 0; x < 9; ++x)
            EXPECT_EQ(z.preimage(S, k).contains(static_cast<std::size_t>(x)), S.contains(static_cast<std::size_t>(z.apply(x, k))));
    }
}

TEST(Permutation, RelabeledRotationIsConjugate) {
    std::vector<std::int64_t> relabel{3, 0, 4, 1, 2};
    auto sys = FinitePermutationSystem::relabeled_rotation(5, 1, relabel);
    CyclicRotation rot(5, 1);
    std::mt19937_64 rng(3);
    for (int t = 0; t < 50; ++t) {
        std::vector<std::int64_t> pts;
        for (int i = 0; i < 5; ++i)
            if (rng() & 1) pts.push_back(i);
        long k = static_cast<long>(rng() % 41) - 20;
        std::vector<std::int64_t> relabeled;
        for (auto p : pts) relabeled.push_back(relabel[static_cast<std::size_t>(p)]);
        auto lhs = sys.preimage(sys.points(relabeled), k);
        std::vector<std::int64_t> rhs_pts;
        for (auto p : rot.preimage(rot.points(pts), k).members()) rhs_pts.push_back(relabel[static_cast<std::size_t>(p)]);
        EXPECT_EQ(lhs, sys.points(rhs_pts));
        EXPECT_EQ(sys.measure(lhs), sys.measure(sys.points(relabeled)));
    }
    EXPECT_THROW(FinitePermutationSystem({0, 0, 1}), argument_error);
}

TEST(Bernoulli, SpecExamples) {
    BernoulliShift b({q(1, 2), q(1, 2)});
    auto A = b.cylinder({{0, 0}});
    EXPECT_EQ(b.measure(A), q(1, 2));
    EXPECT_EQ(b.measure(b.intersect(A, b.preimage(A, 3))), q(1, 4));
    auto merged = b.intersect(A, b.cylinder({{3, 1}}));
    ASSERT_EQ(merged.pieces().size(), 1u);
    EXPECT_EQ(b.measure(merged), q(1, 4));
    EXPECT_TRUE(b.is_empty(b.intersect(A, b.cylinder({{0, 1}}))));
}

TEST(Bernoulli, PreimageRenamesCoordinates) {
    BernoulliShift b({q(1, 3), q(2, 3)});
    auto S = b.preimage(b.cylinder({{0, 1}, {2, 0}}), 5);
    ASSERT_EQ(S.pieces().size(), 1u);
    EXPECT_EQ(S.pieces()[0].fixed, (std::vector<std::pair<std::int64_t, int>>{{5, 1}, {7, 0}}));
    EXPECT_EQ(b.measure(S), q(2, 9));
}

TEST(Bernoulli, InvarianceComplementAndCanonicalEquality) {
    std::mt19937_64 rng(4);
    BernoulliShift b({q(1, 5), q(3, 10), q(1, 2)});
    for (int t = 0; t < 200; ++t) {
        auto S = random_cylinder_union(b, rng);
        long k = static_cast<long>(rng() % 101) - 50, c = static_cast<long>(rng() % 11) - 5;
        EXPECT_EQ(b.measure(b.preimage(S, k)), b.measure(S));
        EXPECT_EQ(b.preimage(S, k + c), b.preimage(b.preimage(S, k), c));
        EXPECT_EQ(b.measure(b.complement(S)), 1 - b.measure(S));
        EXPECT_TRUE(b.same_set(b.complement(b.complement(S)), S));
    }
    // {w0=0} u {w0=1} u {w0=2} is the whole space even though it is cut in pieces.
    auto parts = b.complement(b.intersect(b.complement(b.cylinder({{0, 0}})), b.complement(b.cylinder({{0, 1}}))));
    auto all = b.complement(b.intersect(b.complement(parts), b.complement(b.cylinder({{0, 2}}))));
    EXPECT_TRUE(b.same_set(all, b.whole()));
}

TEST(Bernoulli, WeakMixingWitness) {
    BernoulliShift b({q(1, 2), q(1, 2)});
    auto A = b.cylinder({{0, 0}, {1, 1}});
    auto B = b.cylinder({{0, 1}, {2, 1}});
    const long N = 1024;
    Rational sum = 0;
    for (long n = 1; n <= N; ++n) sum += abs(b.measure(b.intersect(A, b.preimage(B, n))) - b.measure(A) * b.measure(B));
    EXPECT_LT(sum / N, Rational(1, 1000));
}

TEST(Markov, StationaryAndOracle) {
    MarkovShift m({{q(1, 2), q(1, 2), q(0)}, {q(1, 3), q(1, 3), q(1, 3)}, {q(0), q(1, 4), q(3, 4)}});
    const auto& pi = m.stationary_vector();
    for (std::size_t j = 0; j < 3; ++j) {
        Rational s = 0;
        for (std::size_t i = 0; i < 3; ++i) s += pi[i] * m.transition()[i][j];
        EXPECT_EQ(s, pi[j]);
    }
    EXPECT_EQ(std::accumulate(pi.begin(), pi.end(), Rational(0)), 1);
    std::mt19937_64 rng(5);
    for (int t = 0; t < 150; ++t) {
        auto S = random_cylinder_union(m, rng);
        long k = static_cast<long>(rng() % 101) - 50;
        EXPECT_EQ(m.measure(S), markov_brute(m, S));
        EXPECT_EQ(m.measure(m.preimage(S, k)), m.measure(S));
        EXPECT_EQ(m.measure(m.complement(S)), 1 - m.measure(S));
    }
}

TEST(Markov, MatrixPowersMatchRepeatedProducts) {
    auto m = stay_chain(q(9, 10));
    auto P = MarkovShift::identity(2);
    for (long g = 0; g <= 40; ++g) {
        EXPECT_EQ(m.power(g), P);
        P = MarkovShift::mul(P, m.transition());
    }
}

TEST(Markov, RejectsBadMatrices) {
    EXPECT_THROW(MarkovShift({{q(1, 2), q(1, 3)}, {q(1, 2), q(1, 2)}}), argument_error);
    EXPECT_THROW(MarkovShift({{q(1), q(0)}, {q(0), q(1)}}), argument_error);  // two stationary vectors
}

TEST(Product, RectanglesAndInvariance) {
    Product<CyclicRotation, CircleRotation> p(CyclicRotation(3), CircleRotation(q(1, 5)));
    auto R = p.rect(p.first().points({0, 1}), ArcSet::arc(q(1, 10), q(7, 10)));
    EXPECT_EQ(p.measure(R), q(2, 3) * q(3, 5));
    for (long k = -20; k <= 20; ++k) EXPECT_EQ(p.measure(p.preimage(R, k)), p.measure(R));
    EXPECT_EQ(p.measure(p.complement(R)), 1 - p.measure(R));
    EXPECT_TRUE(p.same_set(p.complement(p.complement(R)), R));
}

TEST(Lattice, SpecExamples) {
    BernoulliLattice plane({q(1, 2), q(1, 2)}, 2);
    LatticeAction<BernoulliLattice> act(plane, {site(1, 0), site(0, 1)}, {});
    EXPECT_TRUE(act.commutes());
    LatticeAction<PermutationAction> z2(PermutationAction::torus(2, 1), {site(1)}, {site(1)});
    EXPECT_TRUE(z2.commutes());
    EXPECT_THROW(LatticeAction<BernoulliLattice>(plane, {site(1, 0), site(0, 0)}, {}), argument_error);
    EXPECT_THROW(LatticeAction<BernoulliLattice>(plane, {site(1, 0), site(1, 0)}, {}), argument_error);
}

TEST(Lattice, NonCommutingPermutationsRejected) {
    // (0 1) and (1 2) on three points do not commute.
    EXPECT_THROW(PermutationAction({{1, 0, 2}, {0, 2, 1}}), argument_error);
}

TEST(Lattice, TorusPreimagesAndExponent) {
    auto torus = PermutationAction::torus(3, 2);
    LatticeAction<PermutationAction> act(torus, {site(1, 0), site(1, 2)}, {site(0, 1), site(0, 0)});
    EXPECT_EQ(act.exponent(0, 2, 5), site(2, 5));
    EXPECT_EQ(act.exponent(1, 2, 5), site(2, 4));
    // Point (a,b) is index 3a+b; T^{(1,0)} sends (a,b) to (a+1,b).
    auto S = torus.points({0});
    EXPECT_EQ(act.preimage(S, site(1, 0)), torus.points({6}));
    EXPECT_EQ(act.measure(act.preimage(S, site(4, -7))), q(1, 9));
}

TEST(Lattice, BernoulliLatticeShift) {
    BernoulliLattice b({q(1, 2), q(1, 2)}, 2);
    auto A = b.cylinder({{site(0, 0), 1}});
    auto P = b.preimage(A, site(2, -1));
    EXPECT_EQ(P.pieces()[0].fixed[0].first, site(2, -1));
    EXPECT_EQ(b.measure(b.intersect(A, P)), q(1, 4));
    EXPECT_THROW(b.preimage(A, site(0, 0, 1)), argument_error);
}

TEST(Sampled, GaussMapExact) {
    GaussMap g;
    EXPECT_EQ(g.apply(q(2, 5), 1), q(1, 2));
    EXPECT_EQ(g.apply(q(2, 5), 0), q(2, 5));
    EXPECT_THROW(g.apply(0.3, -1), argument_error);
}

TEST(Sampled, GaussSamplerFollowsGaussMeasure) {
    GaussMap g;
    std::mt19937_64 rng(6);
    const int n = 200000;
    int below = 0;
    for (int i = 0; i < n; ++i) below += g.sample(rng) < 0.5;
    double expected = std::log2(1.5);
    EXPECT_NEAR(static_cast<double>(below) / n, expected, 4 * std::sqrt(expected * (1 - expected) / n));
}

TEST(Sampled, IrrationalRotationHighPrecision) {
    auto rot = IrrationalRotation::sqrt_minus(2, 1);
    auto x = rot.apply(rot.point(0.0), 2);
    // frac(2(sqrt2 - 1)) = 2 sqrt2 - 2 = 0.8284271247461900976...
    EXPECT_NEAR(rot.to_double(x), 0.82842712474619009760, 1e-15);
    // Exact check of the fixed-point value: (x + 2)^2 is just below 8 at 128 bits.
    Rational r = rot.to_rational(x) + 2;
    EXPECT_LT(r * r, 8);
    EXPECT_GT((r + Rational(BigInt(4), BigInt(BigInt(1) << 128))) * (r + Rational(BigInt(4), BigInt(BigInt(1) << 128))), 8);
    EXPECT_EQ(rot.apply(rot.apply(x, 17), -17), x);
    EXPECT_EQ(rot.apply(x, 0), x);
}

TEST(Sampled, AnzaiSkewProductInverts) {
    auto skew = anzai_skew(IrrationalRotation::sqrt_minus(2, 1));
    std::mt19937_64 rng(7);
    for (int t = 0; t < 20; ++t) {
        auto p = skew.sample(rng);
        auto back = skew.apply(skew.apply(p, 9), -9);
        EXPECT_EQ(back.first, p.first);
        EXPECT_NEAR(back.second, p.second, 1e-12);
    }
}

TEST(Sampled, ExactSystemSamplersMatchMeasures) {
    std::mt19937_64 rng(8);
    auto m = stay_chain(q(9, 10));
    auto S = m.cylinder({{0, 0}, {3, 1}});
    const int n = 40000;
    int hits = 0;
    for (int i = 0; i < n; ++i) hits += m.contains(m.preimage(S, 2), m.sample(rng));
    double p = m.measure(S).get_d();
    EXPECT_NEAR(static_cast<double>(hits) / n, p, 4 * std::sqrt(p * (1 - p) / n));

    BernoulliShift b({q(1, 4), q(3, 4)});
    auto B = b.cylinder({{0, 1}, {1, 1}});
    hits = 0;
    for (int i = 0; i < n; ++i) {
        auto x = b.sample(rng);
        // x in T^{-5}B iff T^5 x in B.
        EXPECT_EQ(b.contains(b.preimage(B, 5), x), b.contains(B, b.apply(x, 5)));
        hits += b.contains(B, x);
    }
    p = b.measure(B).get_d();
    EXPECT_NEAR(static_cast<double>(hits) / n, p, 4 * std::sqrt(p * (1 - p) / n));
}
