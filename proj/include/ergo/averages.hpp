#pragma once

// Nonconventional array averages A_N = (1/N) sum_{n=1}^N prod_j T^{P_j(n,N)} f_j.
//
// On the EXACT tier every f_j is a finite combination sum_i c_i 1_{S_i}, so
// x_n = prod_j T^{P_j} f_j expands into terms c * 1_{cap_j T^{-P_j} S_j} and
//   ||A_N - c||^2 = (1/N^2) sum_{n,m} <x_n, x_m> - (2c/N) sum_n int x_n + c^2
// with every inner product an exact measure of an intersection.

#include "ergo/intpoly.hpp"
#include "ergo/parallel.hpp"
#include "ergo/systems.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace ergo {

template <class Sys>
struct Observable {
    using set_type = typename Sys::set_type;
    std::vector<std::pair<Rational, set_type>> terms;  // f = sum c_i 1_{S_i}

    static Observable indicator(set_type s) { return Observable{{{Rational(1), std::move(s)}}}; }
    static Observable constant(const Sys& sys, const Rational& c) { return Observable{{{c, sys.whole()}}}; }

    Rational integral(const Sys& sys) const {
        Rational t = 0;
        for (const auto& [c, s] : terms) t += c * sys.measure(s);
        return t;
    }

    Observable centered(const Sys& sys) const {
        Observable out = *this;
        Rational m = integral(sys);
        if (m != 0) out.terms.emplace_back(-m, sys.whole());
        return out;
    }

    /// sum |c_i|, an upper bound for the sup norm (exact for a single indicator).
    Rational sup_bound() const {
        Rational t = 0;
        for (const auto& term : terms) t += abs(term.first);
        return t;
    }
};

template <class Sys>
struct ArraySpec {
    using exponent_type = typename Sys::exponent_type;
    using exponent_fn = std::function<exponent_type(std::size_t j, std::int64_t n, std::int64_t N)>;

    Sys system;
    std::vector<Observable<Sys>> f;
    exponent_fn exponent;
    bool exponents_depend_on_N = true;
    bool centered = false;
    std::string description;

    /// Observables actually averaged (centered when requested).
    std::vector<Observable<Sys>> effective() const {
        if (!centered) return f;
        std::vector<Observable<Sys>> out;
        for (const auto& g : f) out.push_back(g.centered(system));
        return out;
    }

    /// prod_j int f_j of the effective observables.
    Rational target() const {
        Rational c = 1;
        for (const auto& g : effective()) c *= g.integral(system);
        return c;
    }
};

/// P_j(n, N) exponents for a Z-system.
template <class Sys>
ArraySpec<Sys> polynomial_spec(Sys sys, std::vector<Observable<Sys>> f, std::vector<IntPoly2> P, bool centered = false) {
    if (f.empty()) throw argument_error("array spec needs at least one observable");
    if (f.size() != P.size()) throw argument_error("need one exponent polynomial per observable");
    bool dep = std::any_of(P.begin(), P.end(), [](const IntPoly2& p) { return p.depends_on_N(); });
    ArraySpec<Sys> spec{std::move(sys), std::move(f), nullptr, dep, centered, {}};
    spec.exponent = [P = std::move(P)](std::size_t j, std::int64_t n, std::int64_t N) { return P[j].eval64(n, N); };
    return spec;
}

/// Linear exponents p_j n + q_j N. With `claim_distinct` the distinctness
/// hypothesis (pairwise distinct p_j) is enforced.
template <class Sys>
ArraySpec<Sys> linear_spec(Sys sys, std::vector<Observable<Sys>> f, std::vector<std::pair<std::int64_t, std::int64_t>> pq,
                           bool centered = false, bool claim_distinct = false) {
    if (claim_distinct)
        for (std::size_t i = 0; i < pq.size(); ++i)
            for (std::size_t j = i + 1; j < pq.size(); ++j)
                if (pq[i].first == pq[j].first)
                    throw argument_error("distinctness hypothesis violated: p_" + std::to_string(i + 1) + " = p_" +
                                         std::to_string(j + 1) + " = " + std::to_string(pq[i].first));
    std::vector<IntPoly2> P;
    for (auto [p, q] : pq) P.push_back(IntPoly2::linear(p, q));
    return polynomial_spec(std::move(sys), std::move(f), std::move(P), centered);
}

/// T_j^n That_j^N inside a commuting lattice action.
template <class Base>
ArraySpec<LatticeAction<Base>> lattice_spec(LatticeAction<Base> act, std::vector<Observable<LatticeAction<Base>>> f,
                                            bool centered = false) {
    if (f.size() != act.size()) throw argument_error("need one observable per lattice generator");
    bool dep = std::any_of(act.zhat().begin(), act.zhat().end(), [](const Site& v) { return !is_zero(v); });
    ArraySpec<LatticeAction<Base>> spec{act, std::move(f), nullptr, dep, centered, {}};
    spec.exponent = [act](std::size_t j, std::int64_t n, std::int64_t N) { return act.exponent(j, n, N); };
    return spec;
}

struct AverageOptions {
    unsigned jobs = 1;
    std::int64_t max_N = 4096;
};

namespace detail {

template <class Sys>
using TermList = std::vector<std::pair<Rational, typename Sys::set_type>>;

/// x_n expanded into (coefficient, set) terms; empty sets are dropped.
template <class Sys>
TermList<Sys> expand_terms(const ArraySpec<Sys>& spec, const std::vector<Observable<Sys>>& f, std::int64_t n, std::int64_t N) {
    const Sys& sys = spec.system;
    TermList<Sys> acc{{Rational(1), sys.whole()}};
    for (std::size_t j = 0; j < f.size(); ++j) {
        const auto e = spec.exponent(j, n, N);
        TermList<Sys> next;
        for (const auto& [c, s] : f[j].terms) {
            if (c == 0) continue;
            auto pre = sys.preimage(s, e);
            for (const auto& [ca, sa] : acc) {
                auto x = sys.intersect(sa, pre);
                if (!sys.is_empty(x)) next.emplace_back(ca * c, std::move(x));
            }
        }
        acc = std::move(next);
    }
    return acc;
}

template <class Sys>
Rational inner(const Sys& sys, const TermList<Sys>& a, const TermList<Sys>& b) {
    Rational t = 0;
    for (const auto& [ca, sa] : a)
        for (const auto& [cb, sb] : b) {
            auto x = sys.intersect(sa, sb);
            if (!sys.is_empty(x)) t += ca * cb * sys.measure(x);
        }
    return t;
}

template <class Sys>
Rational integral(const Sys& sys, const TermList<Sys>& a) {
    Rational t = 0;
    for (const auto& [c, s] : a) t += c * sys.measure(s);
    return t;
}

inline void check_N(std::int64_t N, const AverageOptions& opt) {
    if (N < 1) throw argument_error("N must be >= 1");
    if (N > opt.max_N)
        throw resource_error("N = " + std::to_string(N) + " exceeds the exact-engine cap " + std::to_string(opt.max_N));
}

}  // namespace detail

/// Exact ||A_N - prod int f_j||^2.
template <class Sys>
Rational l2_distance_exact(const ArraySpec<Sys>& spec, std::int64_t N, const AverageOptions& opt = {}) {
    detail::check_N(N, opt);
    const auto f = spec.effective();
    const Rational c = spec.target();
    auto terms = parallel_map(static_cast<std::size_t>(N), opt.jobs,
                              [&](std::size_t i) { return detail::expand_terms(spec, f, static_cast<std::int64_t>(i) + 1, N); });
    // Row i contributes G(i,i) + 2 sum_{k>i} G(i,k).
    auto rows = parallel_map(terms.size(), opt.jobs, [&](std::size_t i) {
        Rational r = detail::inner(spec.system, terms[i], terms[i]);
        Rational off = 0;
        for (std::size_t k = i + 1; k < terms.size(); ++k) off += detail::inner(spec.system, terms[i], terms[k]);
        return std::pair<Rational, Rational>{r + 2 * off, detail::integral(spec.system, terms[i])};
    });
    Rational gram = 0, lin = 0;
    for (const auto& [g, l] : rows) {
        gram += g;
        lin += l;
    }
    const Rational NN(N);
    return gram / (NN * NN) - 2 * c * lin / NN + c * c;
}

/// Exact squared distances for several N. When no exponent depends on N the
/// Gram matrix is shared and each N costs only its new column.
template <class Sys>
std::vector<Rational> l2_distance_series(const ArraySpec<Sys>& spec, const std::vector<std::int64_t>& Ns,
                                         const AverageOptions& opt = {}) {
    if (Ns.empty()) return {};
    for (auto N : Ns) detail::check_N(N, opt);
    if (spec.exponents_depend_on_N) {
        std::vector<Rational> out;
        for (auto N : Ns) out.push_back(l2_distance_exact(spec, N, opt));
        return out;
    }
    const std::int64_t Nmax = *std::max_element(Ns.begin(), Ns.end());
    const auto f = spec.effective();
    const Rational c = spec.target();
    auto terms = parallel_map(static_cast<std::size_t>(Nmax), opt.jobs,
                              [&](std::size_t i) { return detail::expand_terms(spec, f, static_cast<std::int64_t>(i) + 1, Nmax); });
    // Column k holds G(k,k) + 2 sum_{i<k} G(i,k).
    auto cols = parallel_map(terms.size(), opt.jobs, [&](std::size_t k) {
        Rational off = 0;
        for (std::size_t i = 0; i < k; ++i) off += detail::inner(spec.system, terms[i], terms[k]);
        return std::pair<Rational, Rational>{detail::inner(spec.system, terms[k], terms[k]) + 2 * off,
                                             detail::integral(spec.system, terms[k])};
    });
    std::vector<Rational> gram_prefix(terms.size() + 1, Rational(0)), lin_prefix(terms.size() + 1, Rational(0));
    for (std::size_t k = 0; k < terms.size(); ++k) {
        gram_prefix[k + 1] = gram_prefix[k] + cols[k].first;
        lin_prefix[k + 1] = lin_prefix[k] + cols[k].second;
    }
    std::vector<Rational> out;
    for (auto N : Ns) {
        const Rational NN(N);
        const auto idx = static_cast<std::size_t>(N);
        out.push_back(gram_prefix[idx] / (NN * NN) - 2 * c * lin_prefix[idx] / NN + c * c);
    }
    return out;
}

/// Commuting-action averages: same expansion with lattice exponents n z_j + N zhat_j.
template <class Base>
Rational commuting_average(const LatticeAction<Base>& act, std::vector<Observable<LatticeAction<Base>>> f, std::int64_t N,
                           bool centered = false, const AverageOptions& opt = {}) {
    return l2_distance_exact(lattice_spec(act, std::move(f), centered), N, opt);
}

// ---------------------------------------------------------------------------
// van der Corput correlations

struct VdcRow {
    std::int64_t h;
    Rational value;  // (1/N) sum_n <x_{n,N}, x_{n+h,N}>
};

struct VdcReport {
    std::vector<VdcRow> rows;
    double delta = 0.05;
    std::size_t discarded = 0;
    Rational trimmed_max;  // max |value| after dropping the top floor(delta H); a diagnostic for the D-lim
};

template <class Sys>
VdcReport vdc_correlations(const ArraySpec<Sys>& spec, std::int64_t N, std::int64_t H, double delta = 0.05,
                           const AverageOptions& opt = {}) {
    detail::check_N(N, opt);
    if (H < 1) throw argument_error("H must be >= 1");
    if (delta < 0 || delta >= 1) throw argument_error("delta must be in [0,1)");
    const auto f = spec.effective();
    auto terms = parallel_map(static_cast<std::size_t>(N + H), opt.jobs,
                              [&](std::size_t i) { return detail::expand_terms(spec, f, static_cast<std::int64_t>(i) + 1, N); });
    VdcReport rep;
    rep.delta = delta;
    auto vals = parallel_map(static_cast<std::size_t>(H), opt.jobs, [&](std::size_t hi) {
        Rational s = 0;
        for (std::size_t n = 0; n < static_cast<std::size_t>(N); ++n) s += detail::inner(spec.system, terms[n], terms[n + hi + 1]);
        return Rational(s / N);
    });
    for (std::size_t i = 0; i < vals.size(); ++i) rep.rows.push_back({static_cast<std::int64_t>(i) + 1, vals[i]});
    std::vector<Rational> mags;
    for (const auto& v : vals) mags.push_back(abs(v));
    std::sort(mags.begin(), mags.end(), [](const Rational& a, const Rational& b) { return a > b; });
    rep.discarded = static_cast<std::size_t>(std::floor(delta * static_cast<double>(H)));
    rep.trimmed_max = rep.discarded < mags.size() ? mags[rep.discarded] : Rational(0);
    return rep;
}

// ---------------------------------------------------------------------------
// Shift-in-n stability: replacing n by n+1 moves ||A_N - c|| by at most
// 2 prod ||f_j||_inf / N. Checked exactly on squared distances.

struct StabilityCheck {
    Rational d0_sq, d1_sq, bound;
    bool holds;
};

/// |sqrt(a) - sqrt(b)| <= B for rationals a, b, B >= 0, decided exactly.
inline bool sqrt_gap_at_most(const Rational& a, const Rational& b, const Rational& B) {
    auto one_side = [&](const Rational& x, const Rational& y) {
        // sqrt(x) <= sqrt(y) + B  <=>  x - y - B^2 <= 2 B sqrt(y)
        Rational lhs = x - y - B * B;
        if (lhs <= 0) return true;
        return lhs * lhs <= 4 * B * B * y;
    };
    return one_side(a, b) && one_side(b, a);
}

template <class Sys>
StabilityCheck shift_stability_check(const ArraySpec<Sys>& spec, std::int64_t N, const AverageOptions& opt = {}) {
    ArraySpec<Sys> shifted = spec;
    shifted.exponent = [e = spec.exponent](std::size_t j, std::int64_t n, std::int64_t M) { return e(j, n + 1, M); };
    StabilityCheck out;
    out.d0_sq = l2_distance_exact(spec, N, opt);
    out.d1_sq = l2_distance_exact(shifted, N, opt);
    Rational prod = 1;
    for (const auto& g : spec.effective()) prod *= g.sup_bound();
    out.bound = 2 * prod / N;
    out.holds = sqrt_gap_at_most(out.d0_sq, out.d1_sq, out.bound);
    return out;
}

// ---------------------------------------------------------------------------
// Monte Carlo tier

template <class Sys>
struct SampledSpec {
    using point_type = typename Sys::point_type;
    using exponent_fn = std::function<std::int64_t(std::size_t j, std::int64_t n, std::int64_t N)>;

    Sys system;
    std::vector<std::function<double(const point_type&)>> f;
    exponent_fn exponent;
    double target = 0;  // prod int f_j, supplied by the caller
};

/// Pointwise view of an exact Z-spec, for cross-checking the two tiers.
template <class Sys>
SampledSpec<Sys> to_sampled(const ArraySpec<Sys>& spec) {
    SampledSpec<Sys> out{spec.system, {}, spec.exponent, spec.target().get_d()};
    for (const auto& g : spec.effective()) {
        out.f.push_back([sys = spec.system, g](const typename Sys::point_type& x) {
            double v = 0;
            for (const auto& [c, s] : g.terms)
                if (sys.contains(s, x)) v += c.get_d();
            return v;
        });
    }
    return out;
}

struct McEstimate {
    double estimate = 0;
    double standard_error = 0;
    std::size_t samples = 0;
};

template <class Sys>
McEstimate l2_distance_mc(const SampledSpec<Sys>& spec, std::int64_t N, std::size_t samples, std::uint64_t seed,
                          unsigned jobs = 1) {
    if (samples < 2) throw argument_error("Monte Carlo needs at least 2 samples");
    if (N < 1) throw argument_error("N must be >= 1");
    bool invertible = true;
    if constexpr (requires { spec.system.is_invertible(); }) invertible = spec.system.is_invertible();
    if (!invertible)
        for (std::int64_t n = 1; n <= N; ++n)
            for (std::size_t j = 0; j < spec.f.size(); ++j)
                if (spec.exponent(j, n, N) < 0)
                    throw argument_error("non-invertible system but exponent P_" + std::to_string(j + 1) + "(" + std::to_string(n) +
                                         "," + std::to_string(N) + ") is negative");
    auto vals = parallel_map(samples, jobs, [&](std::size_t i) {
        std::mt19937_64 rng(detail::splitmix64(seed ^ detail::splitmix64(i)));
        auto x = spec.system.sample(rng);
        double avg = 0;
        for (std::int64_t n = 1; n <= N; ++n) {
            double prod = 1;
            for (std::size_t j = 0; j < spec.f.size() && prod != 0; ++j) prod *= spec.f[j](spec.system.apply(x, spec.exponent(j, n, N)));
            avg += prod;
        }
        double d = avg / static_cast<double>(N) - spec.target;
        return d * d;
    });
    double mean = 0;
    for (double v : vals) mean += v;
    mean /= static_cast<double>(samples);
    double var = 0;
    for (double v : vals) var += (v - mean) * (v - mean);
    var /= static_cast<double>(samples - 1);
    return {mean, std::sqrt(var / static_cast<double>(samples)), samples};
}

// ---------------------------------------------------------------------------
// Convergence sweeps

enum class Verdict { decaying, oscillating, inconclusive };

inline std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::decaying: return "decaying";
        case Verdict::oscillating: return "oscillating";
        default: return "inconclusive";
    }
}

struct ConvergenceRow {
    std::int64_t N = 0;
    std::optional<Rational> exact;  // squared distance, exact tier only
    double value = 0;               // squared distance as a double
    std::string method;             // "exact" or "montecarlo"
    double standard_error = 0;
};

struct SubSeries {
    std::size_t count = 0;
    double last = 0, min = 0, max = 0;
};

struct ConvergenceReport {
    Rational target;
    std::vector<ConvergenceRow> rows;
    SubSeries even, odd;
    Verdict verdict = Verdict::inconclusive;
    double tolerance = 1e-3;
};

/// Verdict rules:
///  - oscillating: the last even-N and last odd-N values differ by more than the tolerance;
///  - decaying: after a burn-in of the first quarter of Ns the series is non-increasing
///    within tolerance and it either ends within tolerance of 0 or falls at least like N^{-1/2};
///  - otherwise inconclusive.
/// The tolerance is 1e-3 on the exact tier and 3 standard errors on the MC tier.
inline Verdict classify(ConvergenceReport& rep) {
    const auto& r = rep.rows;
    auto stats = [&](int parity) {
        SubSeries s;
        for (const auto& row : r)
            if (row.N % 2 == parity) {
                if (s.count == 0) s.min = s.max = row.value;
                s.min = std::min(s.min, row.value);
                s.max = std::max(s.max, row.value);
                s.last = row.value;
                ++s.count;
            }
        return s;
    };
    rep.even = stats(0);
    rep.odd = stats(1);
    if (r.empty()) return rep.verdict = Verdict::inconclusive;
    auto tol = [&](const ConvergenceRow& a, const ConvergenceRow& b) {
        if (a.method == "exact" && b.method == "exact") return rep.tolerance;
        return 3 * std::max(a.standard_error, b.standard_error);
    };
    const ConvergenceRow* last_even = nullptr;
    const ConvergenceRow* last_odd = nullptr;
    for (const auto& row : r) (row.N % 2 == 0 ? last_even : last_odd) = &row;
    if (last_even && last_odd && std::abs(last_even->value - last_odd->value) > tol(*last_even, *last_odd))
        return rep.verdict = Verdict::oscillating;
    const std::size_t b = r.size() / 4;
    bool monotone = true;
    for (std::size_t i = b; i + 1 < r.size(); ++i)
        if (r[i + 1].value > r[i].value + tol(r[i], r[i + 1])) monotone = false;
    const auto& fin = r.back();
    const auto& start = r[b];
    const double abs_tol = fin.method == "exact" ? rep.tolerance : 3 * fin.standard_error;
    const bool small = fin.value <= abs_tol;
    const bool falls = r.size() - b >= 2 &&
                       fin.value * std::sqrt(static_cast<double>(fin.N) / static_cast<double>(start.N)) <= start.value + tol(start, fin);
    return rep.verdict = (monotone && (small || falls)) ? Verdict::decaying : Verdict::inconclusive;
}

struct SweepOptions {
    bool montecarlo = false;
    std::size_t samples = 400;
    std::uint64_t seed = 1;
    AverageOptions avg;
};

template <class Sys>
ConvergenceReport convergence_sweep(const ArraySpec<Sys>& spec, std::vector<std::int64_t> Ns, const SweepOptions& opt = {}) {
    if (Ns.empty()) throw argument_error("Ns must be nonempty");
    for (std::size_t i = 1; i < Ns.size(); ++i)
        if (Ns[i] <= Ns[i - 1]) throw argument_error("Ns must be strictly increasing");
    ConvergenceReport rep;
    rep.target = spec.target();
    if (!opt.montecarlo) {
        auto vals = l2_distance_series(spec, Ns, opt.avg);
        for (std::size_t i = 0; i < Ns.size(); ++i) rep.rows.push_back({Ns[i], vals[i], vals[i].get_d(), "exact", 0.0});
    } else {
        if constexpr (requires { typename Sys::point_type; }) {
            auto sampled = to_sampled(spec);
            for (auto N : Ns) {
                auto est = l2_distance_mc(sampled, N, opt.samples, opt.seed, opt.avg.jobs);
                rep.rows.push_back({N, std::nullopt, est.estimate, "montecarlo", est.standard_error});
            }
        } else {
            throw unsupported_error("this system has no sampler; use the exact method");
        }
    }
    classify(rep);
    return rep;
}

/// Sweep on the SAMPLED tier.
template <class Sys>
ConvergenceReport convergence_sweep(const SampledSpec<Sys>& spec, const std::vector<std::int64_t>& Ns, const SweepOptions& opt) {
    if (Ns.empty()) throw argument_error("Ns must be nonempty");
    ConvergenceReport rep;
    rep.target = Rational(spec.target);
    for (auto N : Ns) {
        auto est = l2_distance_mc(spec, N, opt.samples, opt.seed, opt.avg.jobs);
        rep.rows.push_back({N, std::nullopt, est.estimate, "montecarlo", est.standard_error});
    }
    classify(rep);
    return rep;
}

}  // namespace ergo
