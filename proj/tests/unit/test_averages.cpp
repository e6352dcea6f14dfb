#include "ergo/averages.hpp"
#include "ergo/polyparse.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <random>
#include <set>

using namespace ergo;

namespace {

Rational q(long a, long b = 1) { return make_rational(a, b); }

using Circle = CircleRotation;
using CObs = Observable<Circle>;
using BObs = Observable<BernoulliShift>;

// Pointwise oracle for rational rotations: when the angle and every arc
// endpoint are multiples of 1/Q, A_N is constant on the cells [i/Q,(i+1)/Q),
// so the L2 norm is an exact average over cell midpoints.
Rational circle_grid_l2(const ArraySpec<Circle>& spec, std::int64_t N, long Q) {
    const auto f = spec.effective();
    const Rational c = spec.target();
    Rational total = 0;
    for (long i = 0; i < Q; ++i) {
        Rational x = make_rational(2 * i + 1, 2 * Q);
        Rational avg = 0;
        for (std::int64_t n = 1; n <= N; ++n) {
            Rational prod = 1;
            for (std::size_t j = 0; j < f.size(); ++j) {
                Rational v = 0;
                Rational y = spec.system.apply(x, spec.exponent(j, n, N));
                for (const auto& [coef, s] : f[j].terms)
                    if (s.contains(y)) v += coef;
                prod *= v;
            }
            avg += prod;
        }
        Rational d = avg / N - c;
        total += d * d;
    }
    return total / Q;
}

// Bernoulli oracle: A_N depends on finitely many coordinates; enumerate every
// word on them with its product probability.
Rational bernoulli_brute_l2(const ArraySpec<BernoulliShift>& spec, std::int64_t N) {
    const auto f = spec.effective();
    const Rational c = spec.target();
    std::set<std::int64_t> coords;
    for (std::int64_t n = 1; n <= N; ++n)
        for (std::size_t j = 0; j < f.size(); ++j)
            for (const auto& [coef, s] : f[j].terms)
                for (const auto& cyl : s.pieces())
                    for (const auto& kv : cyl.fixed) coords.insert(kv.first + spec.exponent(j, n, N));
    std::vector<std::int64_t> cs(coords.begin(), coords.end());
    EXPECT_LE(cs.size(), 18u);
    const auto& p = spec.system.probabilities();
    const int A = spec.system.alphabet();
    std::map<std::int64_t, int> word;
    for (auto x : cs) word[x] = 0;
    Rational total = 0;
    for (;;) {
        Rational w = 1;
        for (auto& [k, v] : word) w *= p[static_cast<std::size_t>(v)];
        auto sym = [&](std::int64_t x) { return word.at(x); };
        Rational avg = 0;
        for (std::int64_t n = 1; n <= N; ++n) {
            Rational prod = 1;
            for (std::size_t j = 0; j < f.size(); ++j) {
                Rational v = 0;
                const auto e = spec.exponent(j, n, N);
                for (const auto& [coef, s] : f[j].terms)
                    if (s.contains_word([&](std::int64_t x) { return sym(x + e); })) v += coef;
                prod *= v;
            }
            avg += prod;
        }
        Rational d = avg / N - c;
        total += w * d * d;
        auto it = word.begin();
        while (it != word.end() && ++it->second == A) (it++)->second = 0;
        if (it == word.end()) break;
    }
    return total;
}

ArraySpec<Circle> counterexample_spec() {
    Circle half(q(1, 2));
    auto A = CObs::indicator(half.arc(0, q(1, 4)));
    // k = 1 in the symmetric form: T^{N-n} f * T^n f.
    return linear_spec(half, {A, A}, {{-1, 1}, {1, 0}});
}

}  // namespace

TEST(Averages, CounterexampleExactValues) {
    auto spec = counterexample_spec();
    EXPECT_EQ(spec.target(), q(1, 16));
    for (std::int64_t N = 1; N <= 40; ++N) {
        Rational d = l2_distance_exact(spec, N);
        // Odd N: A_N = 0. Even N: A_N = (1_A + 1_{TA})/2.
        EXPECT_EQ(d, N % 2 ? q(1, 256) : q(25, 256)) << "N=" << N;
        EXPECT_EQ(d, circle_grid_l2(spec, N, 4));
    }
}

TEST(Averages, CounterexampleSeriesAndSweep) {
    auto spec = counterexample_spec();
    std::vector<std::int64_t> Ns;
    for (std::int64_t N = 1; N <= 200; ++N) Ns.push_back(N);
    auto vals = l2_distance_series(spec, Ns);
    for (std::size_t i = 0; i < Ns.size(); ++i) EXPECT_EQ(vals[i], Ns[i] % 2 ? q(1, 256) : q(25, 256));
    auto rep = convergence_sweep(spec, {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16});
    EXPECT_EQ(rep.verdict, Verdict::oscillating);
    EXPECT_DOUBLE_EQ(rep.odd.last, 1.0 / 256);
    EXPECT_DOUBLE_EQ(rep.even.last, 25.0 / 256);
}

TEST(Averages, CenteredBernoulliClosedForm) {
    BernoulliShift b({q(1, 2), q(1, 2)});
    auto spec = linear_spec(b, {BObs::indicator(b.cylinder({{0, 0}}))}, {{1, 0}}, true);
    std::vector<std::int64_t> Ns;
    for (std::int64_t N = 1; N <= 64; ++N) Ns.push_back(N);
    auto vals = l2_distance_series(spec, Ns);
    for (std::size_t i = 0; i < Ns.size(); ++i) EXPECT_EQ(vals[i], Rational(1, 4 * Ns[i]));
    EXPECT_EQ(l2_distance_exact(spec, 37), Rational(1, 148));
}

TEST(Averages, ConstantObservablesGiveZero) {
    Circle rot(q(1, 3));
    auto one = CObs::indicator(rot.whole());
    auto spec = linear_spec(rot, {one, one}, {{1, 0}, {2, 1}});
    for (std::int64_t N : {1, 5, 16}) EXPECT_EQ(l2_distance_exact(spec, N), 0);
    auto rep = convergence_sweep(spec, {4, 8, 16, 32});
    EXPECT_EQ(rep.verdict, Verdict::decaying);
}

TEST(Averages, RandomBernoulliSpecsMatchBruteForce) {
    std::mt19937_64 rng(11);
    BernoulliShift b({q(1, 3), q(2, 3)});
    for (int t = 0; t < 25; ++t) {
        int ell = 1 + static_cast<int>(rng() % 2);
        std::vector<BObs> f;
        std::vector<std::pair<std::int64_t, std::int64_t>> pq;
        for (int j = 0; j < ell; ++j) {
            std::vector<std::pair<std::int64_t, int>> cons{{static_cast<std::int64_t>(rng() % 2), static_cast<int>(rng() % 2)}};
            f.push_back(BObs::indicator(b.cylinder(cons)));
            pq.emplace_back(static_cast<std::int64_t>(rng() % 5) - 2, static_cast<std::int64_t>(rng() % 3) - 1);
        }
        bool centered = rng() & 1;
        auto spec = linear_spec(b, f, pq, centered);
        std::int64_t N = 1 + static_cast<std::int64_t>(rng() % 4);
        EXPECT_EQ(l2_distance_exact(spec, N), bernoulli_brute_l2(spec, N)) << "trial " << t;
    }
}

TEST(Averages, PolynomialSpecMatchesBruteForce) {
    BernoulliShift b({q(1, 2), q(1, 2)});
    auto A = BObs::indicator(b.cylinder({{0, 1}}));
    auto spec = polynomial_spec(b, {A, A}, {parse_intpoly("n^2"), parse_intpoly("n*(n-1)/2 + N")}, true);
    for (std::int64_t N = 1; N <= 4; ++N) EXPECT_EQ(l2_distance_exact(spec, N), bernoulli_brute_l2(spec, N));
}

TEST(Averages, RotationSpecsMatchGridOracle) {
    std::mt19937_64 rng(12);
    for (int t = 0; t < 20; ++t) {
        long Q = 12;
        Circle rot(make_rational(static_cast<long>(rng() % Q), Q));
        std::vector<CObs> f;
        std::vector<std::pair<std::int64_t, std::int64_t>> pq;
        int ell = 1 + static_cast<int>(rng() % 3);
        for (int j = 0; j < ell; ++j) {
            f.push_back(CObs::indicator(rot.arc(make_rational(static_cast<long>(rng() % Q), Q), make_rational(static_cast<long>(rng() % Q), Q))));
            pq.emplace_back(static_cast<std::int64_t>(rng() % 7) - 3, static_cast<std::int64_t>(rng() % 5) - 2);
        }
        auto spec = linear_spec(rot, f, pq, rng() & 1);
        for (std::int64_t N : {1, 3, 8}) EXPECT_EQ(l2_distance_exact(spec, N), circle_grid_l2(spec, N, Q));
    }
}

TEST(Averages, SharedGramSeriesEqualsDirect) {
    Circle rot(q(2, 5));
    auto A = CObs::indicator(rot.arc(q(1, 5), q(3, 5)));
    auto spec = linear_spec(rot, {A, A}, {{1, 0}, {3, 0}}, true);
    ASSERT_FALSE(spec.exponents_depend_on_N);
    std::vector<std::int64_t> Ns{1, 2, 7, 20};
    auto series = l2_distance_series(spec, Ns);
    for (std::size_t i = 0; i < Ns.size(); ++i) EXPECT_EQ(series[i], l2_distance_exact(spec, Ns[i]));
}

TEST(Averages, ParallelEqualsSerial) {
    BernoulliShift b({q(1, 2), q(1, 2)});
    auto A = BObs::indicator(b.cylinder({{0, 0}, {1, 1}}));
    auto spec = linear_spec(b, {A, A}, {{1, 0}, {2, 1}});
    AverageOptions par;
    par.jobs = 4;
    EXPECT_EQ(l2_distance_exact(spec, 50), l2_distance_exact(spec, 50, par));
}

TEST(Averages, DistinctSlopeSweepDecays) {
    BernoulliShift b({q(1, 2), q(1, 2)});
    auto A = BObs::indicator(b.cylinder({{0, 0}}));
    auto spec = linear_spec(b, {A, A}, {{1, 0}, {2, 1}});
    EXPECT_EQ(spec.target(), q(1, 4));
    auto rep = convergence_sweep(spec, {16, 32, 64, 128, 256});
    EXPECT_EQ(rep.verdict, Verdict::decaying);
    for (std::size_t i = 1; i < rep.rows.size(); ++i) EXPECT_LT(*rep.rows[i].exact, *rep.rows[i - 1].exact);
}

TEST(Averages, RandomDistinctLinearSpecsDecay) {
    std::mt19937_64 rng(13);
    BernoulliShift b({q(1, 2), q(1, 2)});
    for (int t = 0; t < 2; ++t) {
        int ell = 2 + t;
        std::vector<BObs> f;
        std::vector<std::pair<std::int64_t, std::int64_t>> pq;
        std::set<std::int64_t> used;
        while (static_cast<int>(pq.size()) < ell) {
            std::int64_t p = static_cast<std::int64_t>(rng() % 7) - 3;
            if (!used.insert(p).second) continue;
            pq.emplace_back(p, static_cast<std::int64_t>(rng() % 7) - 3);
            f.push_back(BObs::indicator(b.cylinder({{static_cast<std::int64_t>(rng() % 3), static_cast<int>(rng() % 2)}})));
        }
        auto spec = linear_spec(b, f, pq, false, true);
        auto d64 = l2_distance_exact(spec, 64), d512 = l2_distance_exact(spec, 512);
        EXPECT_LT(d512, q(1, 100));
        EXPECT_LT(2 * d512, d64);
    }
}

TEST(Averages, EqualSlopesDoNotDecay) {
    Circle half(q(1, 2));
    auto A = CObs::indicator(half.arc(0, q(1, 4)));
    auto B = CObs::indicator(half.arc(0, q(1, 2)));
    auto f1 = A.centered(half);
    auto spec = linear_spec(half, {f1, B}, {{1, 0}, {1, 1}});
    EXPECT_EQ(spec.target(), 0);
    std::vector<std::int64_t> Ns;
    for (std::int64_t N = 1; N <= 64; ++N) Ns.push_back(N);
    auto rep = convergence_sweep(spec, Ns);
    EXPECT_NE(rep.verdict, Verdict::decaying);
    EXPECT_THROW(linear_spec(half, {f1, B}, {{1, 0}, {1, 1}}, false, true), argument_error);
}

TEST(Averages, ShiftStabilityHoldsExactly) {
    std::mt19937_64 rng(14);
    Circle rot(q(1, 6));
    for (int t = 0; t < 15; ++t) {
        std::vector<CObs> f;
        std::vector<std::pair<std::int64_t, std::int64_t>> pq;
        for (int j = 0; j < 2; ++j) {
            f.push_back(CObs::indicator(rot.arc(make_rational(static_cast<long>(rng() % 6), 6), make_rational(static_cast<long>(rng() % 6), 6))));
            pq.emplace_back(static_cast<std::int64_t>(rng() % 5) - 2, static_cast<std::int64_t>(rng() % 5) - 2);
        }
        auto chk = shift_stability_check(linear_spec(rot, f, pq), 1 + static_cast<std::int64_t>(rng() % 30));
        EXPECT_TRUE(chk.holds);
    }
}

TEST(Averages, SqrtGapIsExact) {
    EXPECT_TRUE(sqrt_gap_at_most(q(4), q(1), q(1)));      // |2 - 1| = 1
    EXPECT_FALSE(sqrt_gap_at_most(q(4), q(1), q(99, 100)));
    EXPECT_TRUE(sqrt_gap_at_most(q(1, 4), q(1, 4), q(0)));
    EXPECT_FALSE(sqrt_gap_at_most(q(2), q(0), q(141, 100)));  // sqrt 2 > 1.41
    EXPECT_TRUE(sqrt_gap_at_most(q(2), q(0), q(1415, 1000)));
}

TEST(Vdc, BernoulliNNCorrelationsVanish) {
    BernoulliShift b({q(1, 2), q(1, 2)});
    auto spec = polynomial_spec(b, {BObs::indicator(b.cylinder({{0, 0}}))}, {parse_intpoly("n*N")}, true);
    auto rep = vdc_correlations(spec, 16, 10);
    ASSERT_EQ(rep.rows.size(), 10u);
    for (const auto& row : rep.rows) EXPECT_EQ(row.value, 0);
    EXPECT_EQ(rep.trimmed_max, 0);
}

TEST(Vdc, HalfRotationCorrelationsArePeriodic) {
    Circle half(q(1, 2));
    auto spec = linear_spec(half, {CObs::indicator(half.arc(0, q(1, 4)))}, {{1, 0}}, true);
    auto rep = vdc_correlations(spec, 32, 20);
    for (const auto& row : rep.rows) EXPECT_EQ(row.value, row.h % 2 == 0 ? q(3, 16) : q(-1, 16));
    EXPECT_EQ(rep.discarded, 1u);
    EXPECT_EQ(rep.trimmed_max, q(3, 16));
}

TEST(Vdc, ConstantObservableCorrelationsVanish) {
    Circle rot(q(1, 3));
    auto spec = linear_spec(rot, {CObs::indicator(rot.whole())}, {{1, 0}}, true);
    for (const auto& row : vdc_correlations(spec, 8, 5).rows) EXPECT_EQ(row.value, 0);
}

TEST(Commuting, PlaneBernoulliDecays) {
    BernoulliLattice plane({q(1, 2), q(1, 2)}, 2);
    LatticeAction<BernoulliLattice> act(plane, {site(1, 0), site(0, 1)}, {});
    using LObs = Observable<LatticeAction<BernoulliLattice>>;
    auto A = LObs::indicator(plane.cylinder({{site(0, 0), 1}}));
    auto B = LObs::indicator(plane.cylinder({{site(0, 0), 0}, {site(1, 1), 1}}));
    Rational prev = 1;
    for (std::int64_t N : {16, 32, 64, 128, 256}) {
        Rational d = commuting_average(act, {A, B}, N);
        EXPECT_LT(d, prev);
        prev = d;
    }
    EXPECT_LT(prev, q(1, 100));
}

TEST(Commuting, SingleGeneratorClosedForm) {
    BernoulliLattice plane({q(1, 2), q(1, 2)}, 2);
    LatticeAction<BernoulliLattice> act(plane, {site(1, 0)}, {site(0, 3)});
    using LObs = Observable<LatticeAction<BernoulliLattice>>;
    auto A = LObs::indicator(plane.cylinder({{site(0, 0), 1}}));
    for (std::int64_t N = 1; N <= 20; ++N) EXPECT_EQ(commuting_average(act, {A}, N, true), Rational(1, 4 * N));
    auto one = LObs::indicator(act.whole());
    EXPECT_EQ(commuting_average(act, {one}, 9), 0);
}

TEST(MonteCarlo, AgreesWithExactOnSeededRuns) {
    BernoulliShift b({q(1, 2), q(1, 2)});
    auto A = BObs::indicator(b.cylinder({{0, 0}}));
    auto spec = linear_spec(b, {A, A}, {{1, 0}, {2, 1}});
    const double exact = l2_distance_exact(spec, 12).get_d();
    auto sampled = to_sampled(spec);
    int agree = 0;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        auto est = l2_distance_mc(sampled, 12, 300, seed);
        if (std::abs(est.estimate - exact) <= 4 * est.standard_error) ++agree;
    }
    EXPECT_GE(agree, 99);
}

TEST(MonteCarlo, DeterministicPerSeedAndJobs) {
    Circle rot(q(1, 7));
    auto spec = linear_spec(rot, {CObs::indicator(rot.arc(0, q(2, 7)))}, {{1, 0}}, true);
    auto s = to_sampled(spec);
    auto a = l2_distance_mc(s, 20, 100, 42), b = l2_distance_mc(s, 20, 100, 42, 3);
    EXPECT_EQ(a.estimate, b.estimate);
    EXPECT_EQ(a.standard_error, b.standard_error);
    EXPECT_THROW(l2_distance_mc(s, 20, 1, 42), argument_error);
}

TEST(MonteCarlo, IrrationalRotationMatchesArcOverlapOracle) {
    auto rot = IrrationalRotation::sqrt_minus(2, 1);
    const double a = 0.3;
    SampledSpec<IrrationalRotation> spec{rot, {[&rot, a](const BigInt& x) { return (rot.to_double(x) < a ? 1.0 : 0.0) - a; }},
                                         [](std::size_t, std::int64_t n, std::int64_t) { return n; }, 0.0};
    const std::int64_t N = 1024;
    // (1/N^2) sum_{n,n'} (mu(A cap R^{n-n'}A) - a^2), with |A cap (A+t)| = max(0, a - ||t||).
    const double alpha = std::sqrt(2.0) - 1;
    double oracle = 0;
    for (std::int64_t d = -(N - 1); d <= N - 1; ++d) {
        double t = d * alpha;
        double dist = std::abs(t - std::round(t));
        oracle += static_cast<double>(N - std::abs(d)) * (std::max(0.0, a - dist) - a * a);
    }
    oracle /= static_cast<double>(N) * static_cast<double>(N);
    auto est = l2_distance_mc(spec, N, 400, 7);
    EXPECT_LE(std::abs(est.estimate - oracle), 4 * est.standard_error + 1e-12);
}

TEST(MonteCarlo, NonInvertibleNegativeExponentRejected) {
    SampledSpec<GaussMap> spec{GaussMap{}, {[](const double& x) { return x; }},
                               [](std::size_t, std::int64_t n, std::int64_t N) { return n - N; }, 0.5};
    EXPECT_THROW(l2_distance_mc(spec, 4, 10, 1), argument_error);
    spec.exponent = [](std::size_t, std::int64_t n, std::int64_t) { return n; };
    EXPECT_NO_THROW(l2_distance_mc(spec, 4, 10, 1));
}

TEST(Averages, CapsAndArguments) {
    auto spec = counterexample_spec();
    AverageOptions small;
    small.max_N = 10;
    EXPECT_THROW(l2_distance_exact(spec, 11, small), resource_error);
    EXPECT_THROW(l2_distance_exact(spec, 0), argument_error);
    EXPECT_THROW(convergence_sweep(spec, {4, 2}), argument_error);
}
