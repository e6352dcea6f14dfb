#pragma once

// Multiple-recurrence sums S(N) = (1/N) sum_n mu(A cap T^{-e_1(n,N)}A cap ...),
// syndetic-set detection inside a finite window, and the strip construction
// that turns positive square averages into a bounded-gap sequence.

#include "ergo/core.hpp"
#include "ergo/parallel.hpp"
#include "ergo/systems.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace ergo {

using PQList = std::vector<std::pair<std::int64_t, std::int64_t>>;

/// Drops a leading (0,0) (the j = 0 term is always the identity) and rejects
/// any later p_j = 0.
inline PQList normalize_pq(PQList pq) {
    if (!pq.empty() && pq.front() == std::pair<std::int64_t, std::int64_t>{0, 0}) pq.erase(pq.begin());
    if (pq.empty()) throw argument_error("need at least one pair (p_j, q_j) besides (0,0)");
    for (std::size_t j = 0; j < pq.size(); ++j)
        if (pq[j].first == 0)
            throw argument_error("p_" + std::to_string(j + 1) + " = 0; recurrence needs p_j != 0 for j >= 1");
    return pq;
}

template <class Sys>
struct RecurrenceSpec {
    using exponent_type = typename Sys::exponent_type;
    Sys system;
    typename Sys::set_type A;
    std::size_t ell = 0;  // number of non-identity terms
    std::function<exponent_type(std::size_t j, std::int64_t n, std::int64_t N)> exponent;  // j = 0..ell-1
    std::string description;
};

template <class Sys>
RecurrenceSpec<Sys> recurrence_spec(Sys sys, typename Sys::set_type A, PQList pq) {
    pq = normalize_pq(std::move(pq));
    std::string desc;
    for (auto [p, q] : pq) desc += (desc.empty() ? "" : ",") + ("(" + std::to_string(p) + "," + std::to_string(q) + ")");
    RecurrenceSpec<Sys> spec{std::move(sys), std::move(A), pq.size(), nullptr, desc};
    spec.exponent = [pq](std::size_t j, std::int64_t n, std::int64_t N) { return pq[j].first * n + pq[j].second * N; };
    return spec;
}

/// Commuting-family version: the j-th term is (T_j^n That_j^N)^{-1} A.
template <class Base>
RecurrenceSpec<LatticeAction<Base>> recurrence_spec(LatticeAction<Base> act, typename Base::set_type A) {
    std::size_t ell = act.size();
    RecurrenceSpec<LatticeAction<Base>> spec{act, std::move(A), ell, nullptr, "lattice action"};
    spec.exponent = [act](std::size_t j, std::int64_t n, std::int64_t N) { return act.exponent(j, n, N); };
    return spec;
}

struct RecurrenceSeries {
    std::string description;
    Rational mu_A;
    std::vector<std::int64_t> N;
    std::vector<Rational> S;
};

struct RecurrenceOptions {
    unsigned jobs = 1;
    std::int64_t max_N = 100000;
};

namespace detail {

// Thread-safe memo of T^{-e}A keyed by the exponent.
template <class Sys>
class PreimageMemo {
public:
    using set_type = typename Sys::set_type;
    using key_type = typename Sys::exponent_type;

    PreimageMemo(const Sys& sys, const set_type& A) : sys_(sys), A_(A) {}

    set_type get(const key_type& e) {
        {
            std::lock_guard lock(mu_);
            if (auto it = memo_.find(e); it != memo_.end()) return it->second;
        }
        set_type s = sys_.preimage(A_, e);
        std::lock_guard lock(mu_);
        return memo_.emplace(e, std::move(s)).first->second;
    }

private:
    const Sys& sys_;
    const set_type& A_;
    std::mutex mu_;
    std::map<key_type, set_type> memo_;
};

}  // namespace detail

/// Exact S(N) for a single N.
template <class Sys>
Rational recurrence_value(const RecurrenceSpec<Sys>& spec, std::int64_t N, detail::PreimageMemo<Sys>& memo) {
    const Sys& sys = spec.system;
    Rational total = 0;
    for (std::int64_t n = 1; n <= N; ++n) {
        auto acc = spec.A;
        for (std::size_t j = 0; j < spec.ell && !sys.is_empty(acc); ++j) acc = sys.intersect(acc, memo.get(spec.exponent(j, n, N)));
        if (!sys.is_empty(acc)) total += sys.measure(acc);
    }
    return total / N;
}

template <class Sys>
RecurrenceSeries recurrence_series(const RecurrenceSpec<Sys>& spec, std::int64_t N_max, const RecurrenceOptions& opt = {}) {
    if (N_max < 1) throw argument_error("N_max must be >= 1");
    if (N_max > opt.max_N)
        throw resource_error("N_max = " + std::to_string(N_max) + " exceeds the cap " + std::to_string(opt.max_N));
    if (spec.ell == 0) throw argument_error("recurrence spec has no terms");
    detail::PreimageMemo<Sys> memo(spec.system, spec.A);
    RecurrenceSeries out{spec.description, spec.system.measure(spec.A), {}, {}};
    out.S = parallel_map(static_cast<std::size_t>(N_max), opt.jobs,
                         [&](std::size_t i) { return recurrence_value(spec, static_cast<std::int64_t>(i) + 1, memo); });
    for (std::int64_t N = 1; N <= N_max; ++N) out.N.push_back(N);
    return out;
}

enum class SyndeticVerdict { syndetic_in_window, not_found };

inline std::string to_string(SyndeticVerdict v) {
    return v == SyndeticVerdict::syndetic_in_window ? "syndetic-in-window" : "not-found";
}

struct SyndeticReport {
    Rational eps;
    bool eps_auto = false;
    std::int64_t window_lo = 1, window_hi = 0;  // certificate covers [lo, hi] only
    std::vector<std::int64_t> members;
    std::int64_t max_gap = 0;     // largest gap between consecutive members
    std::int64_t lead_gap = 0;    // first member - (lo - 1)
    std::int64_t trail_gap = 0;   // (hi + 1) - last member
    std::optional<Rational> liminf_estimate;  // min of the values over members
    SyndeticVerdict verdict = SyndeticVerdict::not_found;
};

/// Half the max of the values over the final half of the window.
inline Rational auto_threshold(const std::vector<std::int64_t>& Ns, const std::vector<Rational>& vals) {
    if (Ns.empty()) throw argument_error("empty series");
    const std::int64_t cut = Ns.back() / 2;
    Rational best = 0;
    for (std::size_t i = 0; i < Ns.size(); ++i)
        if (Ns[i] > cut && vals[i] > best) best = vals[i];
    return best / 2;
}

/// Members are the N with value >= eps. Within the window the set counts as
/// syndetic when it has at least two members and the edge gaps do not exceed
/// the interior max gap.
inline SyndeticReport detect_syndetic(const std::vector<std::int64_t>& Ns, const std::vector<Rational>& vals,
                                      std::optional<Rational> eps = std::nullopt) {
    if (Ns.empty() || Ns.size() != vals.size()) throw argument_error("series is empty or malformed");
    if (!std::is_sorted(Ns.begin(), Ns.end())) throw argument_error("series N values must be increasing");
    SyndeticReport r;
    r.eps_auto = !eps;
    r.eps = eps ? *eps : auto_threshold(Ns, vals);
    r.window_lo = Ns.front();
    r.window_hi = Ns.back();
    if (eps && *eps <= 0) throw argument_error("eps must be positive");
    if (r.eps <= 0) return r;  // auto threshold on an all-zero tail
    for (std::size_t i = 0; i < Ns.size(); ++i)
        if (vals[i] >= r.eps) {
            r.members.push_back(Ns[i]);
            if (!r.liminf_estimate || vals[i] < *r.liminf_estimate) r.liminf_estimate = vals[i];
        }
    if (r.members.empty()) return r;
    for (std::size_t i = 1; i < r.members.size(); ++i) r.max_gap = std::max(r.max_gap, r.members[i] - r.members[i - 1]);
    r.lead_gap = r.members.front() - (r.window_lo - 1);
    r.trail_gap = (r.window_hi + 1) - r.members.back();
    if (r.members.size() >= 2 && r.lead_gap <= r.max_gap && r.trail_gap <= r.max_gap)
        r.verdict = SyndeticVerdict::syndetic_in_window;
    return r;
}

inline SyndeticReport detect_syndetic(const RecurrenceSeries& s, std::optional<Rational> eps = std::nullopt) {
    return detect_syndetic(s.N, s.S, std::move(eps));
}

// ---------------------------------------------------------------------------
// Bounded-gap extraction from a grid a_{n,m} >= 0 on [1,L]^2.

struct Grid {
    std::int64_t L = 0;
    std::vector<Rational> values;  // row-major: row m (the "N" index), column n

    explicit Grid(std::int64_t side = 0) : L(side), values(static_cast<std::size_t>(side * side)) {}
    Rational& at(std::int64_t n, std::int64_t m) { return values[static_cast<std::size_t>((m - 1) * L + (n - 1))]; }
    const Rational& at(std::int64_t n, std::int64_t m) const {
        return values[static_cast<std::size_t>((m - 1) * L + (n - 1))];
    }
};

struct GridSelection {
    std::int64_t strip;  // j
    std::int64_t N;      // selected row
    Rational row_sum;    // sum_{n <= N} a_{n,N}
    Rational average;    // row_sum / N
    bool guaranteed;     // strip index past the point where the average bound is proved
};

struct GridExtraction {
    std::int64_t M = 0;
    Rational eps;
    std::vector<GridSelection> selections;
    std::int64_t max_gap = 0;
    Rational min_average_guaranteed;  // over selections with guaranteed = true
    std::int64_t first_guaranteed_strip = 0;
};

/// Returns the lower-left corner of an M-square with no entry >= eps, if any.
inline std::optional<std::pair<std::int64_t, std::int64_t>> find_bad_square(const Grid& g, const Rational& eps,
                                                                            std::int64_t M) {
    const std::int64_t L = g.L;
    // 2D prefix counts of entries >= eps.
    std::vector<std::int64_t> pre(static_cast<std::size_t>((L + 1) * (L + 1)), 0);
    auto P = [&](std::int64_t n, std::int64_t m) -> std::int64_t& { return pre[static_cast<std::size_t>(m * (L + 1) + n)]; };
    for (std::int64_t m = 1; m <= L; ++m)
        for (std::int64_t n = 1; n <= L; ++n)
            P(n, m) = (g.at(n, m) >= eps ? 1 : 0) + P(n - 1, m) + P(n, m - 1) - P(n - 1, m - 1);
    for (std::int64_t m = M; m <= L; ++m)
        for (std::int64_t n = M; n <= L; ++n)
            if (P(n, m) - P(n - M, m) - P(n, m - M) + P(n - M, m - M) == 0) return std::pair{n - M + 1, m - M + 1};
    return std::nullopt;
}

/// Strips Q_j cover rows [j(M+1), (j+1)(M+1)). Within the first M rows of a
/// strip the columns n <= j(M+1) contain j disjoint M-squares, each holding an
/// entry >= eps, so some row there has a large sum; we keep the row with the
/// best average. Consecutive picks are at most 2M apart.
///
/// The row-average bound eps/(M+1)^2 is the liminf statement: it is proved
/// once floor(j(M+1)/M)(M+1)^2 >= M(j(M+1)+M-1), and selections from earlier
/// strips are reported but flagged as not guaranteed.
inline GridExtraction extract_syndetic_from_grid(const Grid& g, const Rational& eps, std::int64_t M) {
    if (M < 1) throw argument_error("square side M must be >= 1");
    if (eps <= 0) throw argument_error("eps must be positive");
    if (g.L < 2 * (M + 1)) throw argument_error("grid side " + std::to_string(g.L) + " too small for M = " + std::to_string(M));
    for (const auto& v : g.values)
        if (v < 0) throw argument_error("grid entries must be nonnegative");
    if (auto bad = find_bad_square(g, eps, M))
        throw argument_error("hypothesis fails: the " + std::to_string(M) + "-square with corner (n,m) = (" +
                             std::to_string(bad->first) + "," + std::to_string(bad->second) + ") has no entry >= " +
                             eps.get_str());
    GridExtraction out;
    out.M = M;
    out.eps = eps;
    const Rational bound = eps / ((M + 1) * (M + 1));
    bool have_min = false;
    for (std::int64_t j = 1; j * (M + 1) + M - 1 <= g.L; ++j) {
        const std::int64_t r0 = j * (M + 1);
        std::optional<GridSelection> best;
        for (std::int64_t m = r0; m <= r0 + M - 1; ++m) {
            Rational sum = 0;
            for (std::int64_t n = 1; n <= m; ++n) sum += g.at(n, m);
            Rational avg = sum / m;
            if (!best || avg > best->average) best = GridSelection{j, m, sum, avg, false};
        }
        best->guaranteed = (r0 / M) * (M + 1) * (M + 1) >= M * (r0 + M - 1);
        if (best->guaranteed) {
            if (out.first_guaranteed_strip == 0) out.first_guaranteed_strip = j;
            if (best->average < bound)
                throw std::logic_error("grid extraction: strip " + std::to_string(j) + " violates the proved bound");
            if (!have_min || best->average < out.min_average_guaranteed) out.min_average_guaranteed = best->average;
            have_min = true;
        }
        if (!out.selections.empty()) out.max_gap = std::max(out.max_gap, best->N - out.selections.back().N);
        out.selections.push_back(*best);
    }
    if (out.max_gap > 2 * M) throw std::logic_error("grid extraction: gap exceeds 2M");
    return out;
}

}  // namespace ergo
