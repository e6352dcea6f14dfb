#pragma once

// Mixing on finite-state Markov shifts (alpha coefficients, higher-order
// mixing gaps, the multi-window covariance inequality) and the level sets
// Gamma_{eps_k, N_k} of the weak-mixing non-convergence construction.

#include "ergo/core.hpp"
#include "ergo/systems/cylinder.hpp"

#include <algorithm>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace ergo {

using Matrix = MarkovShift::Matrix;

/// Rows of small positive integers, normalized. Strict positivity makes the
/// chain irreducible and aperiodic, so the stationary vector is unique.
template <class Rng> Matrix random_stochastic_matrix(int s, Rng& rng, int max_weight = 9) {
    if (s < 1) throw argument_error("state count must be >= 1");
    Matrix P(static_cast<std::size_t>(s), std::vector<Rational>(static_cast<std::size_t>(s)));
    for (auto& row : P) {
        long total = 0;
        std::vector<long> w;
        for (int j = 0; j < s; ++j) total += w.emplace_back(1 + static_cast<long>(rng() % static_cast<std::uint64_t>(max_weight)));
        for (int j = 0; j < s; ++j) row[static_cast<std::size_t>(j)] = make_rational(w[static_cast<std::size_t>(j)], total);
    }
    return P;
}

/// alpha(n) restricted to past events on coordinates [-h, 0] and future events
/// on [n, n+h]. For a word a ending in x and a word b starting in y,
/// mu(a cap b) = mu(a) mu(b) P^n(x,y) / pi(y), so the covariance matrix over
/// atoms has rows that are positive multiples of the row for their last state
/// (columns likewise for their first state). The bilinear supremum is then
/// attained on unions of whole state classes, and the value does not depend
/// on h: for Markov chains the finite-horizon value is already alpha(n).
inline Rational alpha_coefficient(const MarkovShift& chain, std::int64_t n, int horizon) {
    if (n < 0) throw argument_error("alpha needs n >= 0");
    if (horizon < 0) throw argument_error("horizon must be >= 0");
    const int s = chain.alphabet();
    double atoms = 1;
    for (int i = 0; i <= horizon; ++i) atoms *= s;
    if (atoms > double(1 << 20)) throw resource_error("s^(horizon+1) = " + std::to_string(static_cast<long long>(atoms)) + " exceeds 2^20 atoms");
    if (s > 20) throw resource_error("more than 20 states");
    const auto& pi = chain.stationary_vector();
    const Matrix K = chain.power(n);
    std::vector<std::vector<Rational>> c(static_cast<std::size_t>(s), std::vector<Rational>(static_cast<std::size_t>(s)));
    for (std::size_t x = 0; x < c.size(); ++x)
        for (std::size_t y = 0; y < c.size(); ++y) c[x][y] = pi[x] * K[x][y] - pi[x] * pi[y];
    Rational best = 0;
    // For each class set X the best Y is the positive or the negative part of the column sums.
    for (std::uint32_t X = 1; X < (1u << s); ++X) {
        Rational pos = 0, neg = 0;
        for (std::size_t y = 0; y < c.size(); ++y) {
            Rational r = 0;
            for (std::size_t x = 0; x < c.size(); ++x)
                if (X >> x & 1u) r += c[x][y];
            (r > 0 ? pos : neg) += r;
        }
        best = std::max({best, pos, Rational(-neg)});
    }
    return best;
}

/// |mu(G_1 cap T^{-l_1} G_2 cap ... ) - prod mu(G_i)| with G_i given as
/// cylinder sets; overlapping spans are merged exactly by the set algebra.
inline Rational higher_mixing_gap(const MarkovShift& chain, const std::vector<MarkovShift::set_type>& G,
                                  const std::vector<std::int64_t>& lags) {
    if (G.empty()) throw argument_error("need at least one cylinder");
    if (lags.size() + 1 != G.size()) throw argument_error("need k-1 lags for k cylinders");
    for (auto l : lags)
        if (l < 1) throw argument_error("lags must be >= 1");
    auto acc = G[0];
    Rational prod = chain.measure(G[0]);
    std::int64_t shift = 0;
    for (std::size_t i = 1; i < G.size(); ++i) {
        shift += lags[i - 1];
        acc = chain.intersect(acc, chain.preimage(G[i], shift));
        prod *= chain.measure(G[i]);
    }
    return abs(chain.measure(acc) - prod);
}

/// A union of words on the coordinate window [m, n].
struct WindowEvent {
    std::int64_t m = 0, n = 0;
    std::vector<std::vector<int>> words;
};

template <class Rng> WindowEvent random_window_event(int s, std::int64_t m, std::int64_t n, Rng& rng) {
    WindowEvent e{m, n, {}};
    const auto len = static_cast<std::size_t>(n - m + 1);
    std::vector<int> w(len, 0);
    for (;;) {
        if (rng() & 1) e.words.push_back(w);
        std::size_t i = 0;
        while (i < len && ++w[i] == s) w[i++] = 0;
        if (i == len) break;
    }
    return e;
}

struct MixingCheck {
    Rational lhs, rhs;
    std::vector<Rational> alphas;  // alpha(m_{i+1} - n_i)
    bool holds = false;
};

namespace detail {

inline void validate_events(const MarkovShift& chain, const std::vector<WindowEvent>& G) {
    if (G.empty()) throw argument_error("need at least one event");
    for (std::size_t i = 0; i < G.size(); ++i) {
        const auto& e = G[i];
        if (e.m > e.n) throw argument_error("event " + std::to_string(i + 1) + ": window [m,n] has m > n");
        if (i + 1 < G.size() && e.n >= G[i + 1].m)
            throw argument_error("events " + std::to_string(i + 1) + " and " + std::to_string(i + 2) + ": windows must satisfy n_i < m_{i+1}");
        if (e.n - e.m > 16) throw resource_error("event window longer than 17 coordinates");
        for (const auto& w : e.words) {
            if (static_cast<std::int64_t>(w.size()) != e.n - e.m + 1)
                throw argument_error("event " + std::to_string(i + 1) + ": word length does not match its window");
            for (int x : w)
                if (x < 0 || x >= chain.alphabet()) throw argument_error("event symbol out of range");
        }
    }
}

// Forward pass: v(y) = mu(events so far, X at the current coordinate = y).
inline Rational joint_measure(const MarkovShift& chain, const std::vector<const WindowEvent*>& G) {
    const auto& P = chain.transition();
    const auto s = static_cast<std::size_t>(chain.alphabet());
    std::vector<Rational> v = chain.stationary_vector();
    std::int64_t at = G.front()->m;
    for (const auto* e : G) {
        if (e->m > at) {
            auto K = chain.power(e->m - at);
            std::vector<Rational> nv(s, Rational(0));
            for (std::size_t x = 0; x < s; ++x)
                for (std::size_t y = 0; y < s; ++y) nv[y] += v[x] * K[x][y];
            v = std::move(nv);
        }
        std::vector<Rational> out(s, Rational(0));
        std::set<std::vector<int>> seen;
        for (const auto& w : e->words) {
            if (!seen.insert(w).second) continue;
            Rational p = v[static_cast<std::size_t>(w[0])];
            for (std::size_t t = 1; t < w.size() && p != 0; ++t) p *= P[static_cast<std::size_t>(w[t - 1])][static_cast<std::size_t>(w[t])];
            out[static_cast<std::size_t>(w.back())] += p;
        }
        v = std::move(out);
        at = e->n;
    }
    Rational total = 0;
    for (const auto& x : v) total += x;
    return total;
}

}  // namespace detail

inline Rational event_measure(const MarkovShift& chain, const WindowEvent& e) {
    detail::validate_events(chain, {e});
    return detail::joint_measure(chain, {&e});
}

/// |mu(cap G_i) - prod mu(G_i)| against sum_i alpha(m_{i+1} - n_i).
inline MixingCheck mixing_inequality_check(const MarkovShift& chain, const std::vector<WindowEvent>& G, int horizon) {
    detail::validate_events(chain, G);
    std::vector<const WindowEvent*> all;
    Rational prod = 1;
    for (const auto& e : G) {
        all.push_back(&e);
        prod *= detail::joint_measure(chain, {&e});
    }
    MixingCheck out;
    out.lhs = abs(detail::joint_measure(chain, all) - prod);
    out.rhs = 0;
    for (std::size_t i = 0; i + 1 < G.size(); ++i) {
        out.alphas.push_back(alpha_coefficient(chain, G[i + 1].m - G[i].n, horizon));
        out.rhs += out.alphas.back();
    }
    out.holds = out.lhs <= out.rhs;
    return out;
}

// ---------------------------------------------------------------------------
// Level sets Gamma_{eps,M} = {u : dist(uM, Z) <= eps}.

namespace detail {
// pi to 20 decimals, bracketed.
inline const Rational& pi_lo() {
    static const Rational v = make_rational(BigInt("314159265358979323846"), BigInt("100000000000000000000"));
    return v;
}
inline const Rational& pi_hi() {
    static const Rational v = make_rational(BigInt("314159265358979323847"), BigInt("100000000000000000000"));
    return v;
}
inline BigInt floor_div(const BigInt& a, const BigInt& b) {
    BigInt r;
    mpz_fdiv_q(r.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
    return r;
}
inline BigInt floor_q(const Rational& q) { return floor_div(q.get_num(), q.get_den()); }
inline BigInt ceil_q(const Rational& q) { return -floor_div(-q.get_num(), q.get_den()); }
}  // namespace detail

struct SpectralConstruction {
    Rational eps;
    std::vector<BigInt> N;         // N_0 = 1, ..., N_kmax
    std::vector<Rational> eps_k;   // eps / N_k
    int depth() const { return static_cast<int>(N.size()) - 1; }
};

/// N_{k+1} = floor(5 N_k^2 / eps), eps_k = eps / N_k, for 0 < eps < 1/(2 pi).
inline SpectralConstruction spectral_levels(const Rational& eps, int k_max) {
    if (eps <= 0 || 2 * detail::pi_hi() * eps >= 1)
        throw argument_error("eps = " + eps.get_str() + " must lie in (0, 1/(2 pi))");
    if (k_max < 0 || k_max > 4) throw argument_error("k_max must be 0..4");
    SpectralConstruction c{eps, {BigInt(1)}, {eps}};
    for (int k = 0; k < k_max; ++k) {
        Rational next = Rational(5 * c.N.back() * c.N.back()) / eps;
        c.N.push_back(detail::floor_q(next));
        c.eps_k.push_back(eps / Rational(c.N.back()));
    }
    return c;
}

/// Nested choice of one interval [(m - eps_j)/N_j, (m + eps_j)/N_j] per level
/// j = 1..k, each meeting the previous intersection; returns the midpoint of
/// the final intersection.
template <class Rng> Rational sample_level_point(const SpectralConstruction& c, int k, Rng& rng) {
    if (k < 1 || k > c.depth()) throw argument_error("level k outside 1..depth");
    Rational lo = 0, hi = 1;
    for (int j = 1; j <= k; ++j) {
        const Rational N(c.N[static_cast<std::size_t>(j)]);
        const Rational& e = c.eps_k[static_cast<std::size_t>(j)];
        BigInt m0 = detail::ceil_q(lo * N - e), m1 = detail::floor_q(hi * N + e);
        if (m1 < m0) throw retryable_error("level " + std::to_string(j) + " has no interval meeting the current one");
        BigInt span = m1 - m0 + 1;
        if (!span.fits_ulong_p()) throw resource_error("too many candidate intervals at level " + std::to_string(j));
        BigInt m = m0 + BigInt(static_cast<unsigned long>(rng() % span.get_ui()));
        lo = std::max(lo, Rational((m - e) / N));
        hi = std::min(hi, Rational((m + e) / N));
        if (hi < lo) throw retryable_error("empty intersection at level " + std::to_string(j));
    }
    return (lo + hi) / 2;
}

/// max over n in [1, n_max] of dist(u n M, Z), exact.
inline Rational max_orbit_distance(const Rational& u, const BigInt& M, std::int64_t n_max) {
    const BigInt& b = u.get_den();
    BigInt r;
    BigInt aM = u.get_num() * M;
    mpz_fdiv_r(r.get_mpz_t(), aM.get_mpz_t(), b.get_mpz_t());
    BigInt best = 0;
    if (b.fits_slong_p() && b < (BigInt(1) << 62)) {
        const auto B = static_cast<__int128>(b.get_si()), R = static_cast<__int128>(r.get_si());
        __int128 top = 0, x = 0;
        for (std::int64_t n = 1; n <= n_max; ++n) {
            x += R;
            if (x >= B) x -= B;
            top = std::max(top, std::min(x, B - x));
        }
        best = BigInt(static_cast<long>(top));
    } else {
        BigInt x = 0;
        for (std::int64_t n = 1; n <= n_max; ++n) {
            x += r;
            if (x >= b) x -= b;
            BigInt d = x < b - x ? x : BigInt(b - x);
            if (d > best) best = d;
        }
    }
    return make_rational(best, b);
}

struct SpectralCheck {
    int k = 0;
    std::size_t samples = 0;
    std::int64_t n_checked = 0;  // n ranges over [1, n_checked]
    bool truncated = false;      // n_checked < N_k
    Rational max_deviation;      // of dist(u n N_k, Z)
    bool holds = false;          // max_deviation <= eps
    std::vector<Rational> points;
};

/// Checks dist(u n N_k, Z) <= eps for sampled u in the level-k intersection.
inline SpectralCheck verify_spectral_bound(const SpectralConstruction& c, int k, std::size_t samples, std::uint64_t seed,
                                           std::int64_t n_cap = 10'000'000) {
    if (k < 1 || k > c.depth()) throw argument_error("k must lie in 1..depth");
    if (samples < 1) throw argument_error("need at least one sample");
    const BigInt& Nk = c.N[static_cast<std::size_t>(k)];
    SpectralCheck out;
    out.k = k;
    out.n_checked = Nk.fits_slong_p() ? std::min<std::int64_t>(Nk.get_si(), n_cap) : n_cap;
    out.truncated = BigInt(out.n_checked) < Nk;
    std::mt19937_64 rng(seed);
    out.max_deviation = 0;
    for (std::size_t i = 0; i < samples; ++i) {
        Rational u = sample_level_point(c, k, rng);
        out.max_deviation = std::max(out.max_deviation, max_orbit_distance(u, Nk, out.n_checked));
        if (out.points.size() < 16) out.points.push_back(u);
    }
    out.samples = samples;
    out.holds = out.max_deviation <= c.eps;
    return out;
}

/// ||A_N||^2 for A_N = (1/N) sum_{n=1}^N f(x + n N u) on the circle with
/// f = 1_[0,1/2) - 1/2. Uses <f, f o R_t> = 1/4 - ||t||, so the Gram sum
/// collapses to O(N) terms.
inline Rational half_arc_average_norm_sq(const Rational& u, std::int64_t N) {
    if (N < 1) throw argument_error("N must be >= 1");
    const BigInt& b = u.get_den();
    BigInt step;
    BigInt aN = u.get_num() * N;
    mpz_fdiv_r(step.get_mpz_t(), aN.get_mpz_t(), b.get_mpz_t());
    // sum_{d=1}^{N-1} (N-d) ||d N u|| accumulated as an integer over b.
    BigInt x = 0, acc = 0;
    for (std::int64_t d = 1; d < N; ++d) {
        x += step;
        if (x >= b) x -= b;
        BigInt dist = x < b - x ? x : BigInt(b - x);
        acc += BigInt(N - d) * dist;
    }
    const Rational NN(N);
    Rational sum = NN * Rational(1, 4) + 2 * (Rational(N * (N - 1) / 2) * Rational(1, 4) - make_rational(acc, b));
    return sum / (NN * NN);
}

struct NonConvergenceWitness {
    int k = 0;
    BigInt N;
    Rational u;
    Rational norm_sq;   // ||A_{N_k}||^2
    Rational bound_sq;  // (1 - 2 pi eps)^2 ||f||^2 with pi rounded down
    bool holds = false;
};

/// At N = N_k the average of f o R^{nN} stays close to f itself, so it cannot
/// tend to the integral 0.
inline NonConvergenceWitness nonconvergence_witness(const SpectralConstruction& c, const Rational& u, int k) {
    if (k < 1 || k > c.depth()) throw argument_error("k must lie in 1..depth");
    const BigInt& Nk = c.N[static_cast<std::size_t>(k)];
    if (Nk > 10'000'000) throw resource_error("N_k too large for the exact witness");
    NonConvergenceWitness w{k, Nk, u, half_arc_average_norm_sq(u, Nk.get_si()), 0, false};
    Rational a = 1 - 2 * detail::pi_lo() * c.eps;
    w.bound_sq = a * a / 4;
    w.holds = w.norm_sq >= w.bound_sq;
    return w;
}

}  // namespace ergo
