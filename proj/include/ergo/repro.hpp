#pragma once

// The eleven acceptance experiments as library calls, so that the acceptance
// binary and `ergo repro-all` run exactly the same code.

#include "ergo/averages.hpp"
#include "ergo/config.hpp"
#include "ergo/intpoly.hpp"
#include "ergo/mixing.hpp"
#include "ergo/pet.hpp"
#include "ergo/recurrence.hpp"
#include "ergo/szemeredi.hpp"

#include <chrono>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace ergo::repro {

struct CriterionResult {
    int id = 0;
    std::string title;
    bool pass = false;
    std::string detail;
    double seconds = 0;
    json artifact;
};

struct ReproOptions {
    unsigned jobs = 1;
    std::uint64_t seed = 1;
    std::string pet_corpus;  // path to the PET corpus file
    std::set<int> only;      // empty: run all
};

namespace detail {

inline Rational q(long a, long b = 1) { return make_rational(a, b); }

inline json rationals(const std::vector<Rational>& v) {
    json out = json::array();
    for (const auto& x : v) out.push_back(rational_to_json(x));
    return out;
}

inline std::vector<std::int64_t> one_to(std::int64_t n) {
    std::vector<std::int64_t> out;
    for (std::int64_t i = 1; i <= n; ++i) out.push_back(i);
    return out;
}

inline std::string str(const Rational& x) { return x.get_str(); }

// 1. Rotation by 1/2, A = [0,1/4), symmetric spec.
inline CriterionResult counterexample(const ReproOptions& o) {
    CriterionResult r{1, "counterexample: S(N) = 0 for odd N, 1/8 for even N <= 200; sweep oscillates", false, "", 0, {}};
    CircleRotation half(q(1, 2));
    auto A = half.arc(0, q(1, 4));
    auto series = recurrence_series(recurrence_spec(half, A, {{1, 0}, {-1, 1}}), 200, {o.jobs, 100000});
    std::int64_t bad = 0;
    for (std::size_t i = 0; i < series.S.size(); ++i)
        if (series.S[i] != (series.N[i] % 2 ? q(0) : q(1, 8))) ++bad;
    auto f = Observable<CircleRotation>::indicator(A);
    auto spec = linear_spec(half, {f, f}, {{-1, 1}, {1, 0}});
    SweepOptions so;
    so.avg.jobs = o.jobs;
    auto sweep = convergence_sweep(spec, one_to(16), so);
    r.pass = bad == 0 && sweep.verdict == Verdict::oscillating;
    r.detail = std::to_string(200 - bad) + "/200 exact values match; sweep verdict " + to_string(sweep.verdict);
    r.artifact = {{"S", rationals(series.S)}, {"verdict", to_string(sweep.verdict)},
                  {"even_last", sweep.even.last}, {"odd_last", sweep.odd.last}};
    return r;
}

// 2. Bernoulli(1/2), (1,0),(2,1), length-1 cylinders.
inline CriterionResult distinct_slopes(const ReproOptions& o) {
    CriterionResult r{2, "Bernoulli(1/2), (1,0),(2,1): ||A_N - 1/4||^2 strictly decreasing at N = 2^4..2^10, final < 1e-2", false, "", 0, {}};
    BernoulliShift b({q(1, 2), q(1, 2)});
    auto f = Observable<BernoulliShift>::indicator(b.cylinder({{0, 0}}));
    auto spec = linear_spec(b, {f, f}, {{1, 0}, {2, 1}}, false, true);
    const std::vector<std::int64_t> Ns{16, 64, 256, 1024};
    auto vals = l2_distance_series(spec, Ns, {o.jobs, 4096});
    bool dec = true;
    for (std::size_t i = 1; i < vals.size(); ++i) dec = dec && vals[i] < vals[i - 1];
    r.pass = spec.target() == q(1, 4) && dec && vals.back() < q(1, 100);
    std::string s;
    for (std::size_t i = 0; i < Ns.size(); ++i) s += (i ? ", " : "") + std::string("N=") + std::to_string(Ns[i]) + ": " + str(vals[i]);
    r.detail = s;
    json rows = json::array();
    for (std::size_t i = 0; i < Ns.size(); ++i) rows.push_back({{"N", Ns[i]}, {"distance_sq", rational_to_json(vals[i])}});
    r.artifact = {{"rows", rows}};
    return r;
}

// 3. Centered length-1 cylinder: ||A_N||^2 = 1/(4N).
inline CriterionResult closed_form(const ReproOptions& o) {
    CriterionResult r{3, "centered Bernoulli(1/2), l=1: ||A_N||^2 = 1/(4N) for N = 1..256", false, "", 0, {}};
    BernoulliShift b({q(1, 2), q(1, 2)});
    auto spec = linear_spec(b, {Observable<BernoulliShift>::indicator(b.cylinder({{0, 0}}))}, {{1, 0}}, true);
    auto Ns = one_to(256);
    auto vals = l2_distance_series(spec, Ns, {o.jobs, 4096});
    int ok = 0;
    for (std::size_t i = 0; i < Ns.size(); ++i) ok += vals[i] == q(1, 4 * Ns[i]);
    r.pass = ok == 256;
    r.detail = std::to_string(ok) + "/256 exact matches";
    r.artifact = {{"values", rationals(vals)}};
    return r;
}

// 4. Cyclic rotations, A = {0}, (1,0),(-1,1), N_max = 500.
inline CriterionResult compact_syndetic(const ReproOptions& o) {
    CriterionResult r{4, "cyclic Z_m, m in {2,3,4,6}: syndetic-in-window with max_gap <= m^2 at N_max = 500", true, "", 0, json::array()};
    for (std::int64_t m : {2, 3, 4, 6}) {
        CyclicRotation z(m);
        auto s = recurrence_series(recurrence_spec(z, z.points({0}), {{1, 0}, {-1, 1}}), 500, {o.jobs, 100000});
        auto rep = detect_syndetic(s);
        bool ok = rep.verdict == SyndeticVerdict::syndetic_in_window && rep.max_gap <= m * m;
        r.pass = r.pass && ok;
        r.detail += (r.detail.empty() ? "" : "; ") + std::string("m=") + std::to_string(m) + ": " + to_string(rep.verdict) +
                    ", max_gap " + std::to_string(rep.max_gap);
        r.artifact.push_back({{"m", m}, {"eps", rational_to_json(rep.eps)}, {"verdict", to_string(rep.verdict)},
                              {"max_gap", rep.max_gap}, {"members", rep.members.size()}});
    }
    return r;
}

// 5. Random grids satisfying the M-square hypothesis.
inline CriterionResult grid_extraction(const ReproOptions& o) {
    CriterionResult r{5, "grid extraction on 100 random M-square grids: gap <= 2M and row average >= eps/(M+1)^2", false, "", 0, {}};
    std::mt19937_64 rng(o.seed * 1000003 + 5);
    int gaps_ok = 0, bound_ok = 0, every_strip = 0;
    for (int t = 0; t < 100; ++t) {
        std::int64_t M = 1 + static_cast<std::int64_t>(rng() % 4);
        std::int64_t L = 40 + static_cast<std::int64_t>(rng() % 30);
        Rational eps = q(1 + static_cast<long>(rng() % 3), 3);
        Grid g(L);
        for (auto& v : g.values) v = rng() % 10 == 0 ? q(static_cast<long>(rng() % 4), 3) : Rational(0);
        for (std::int64_t m0 = 1; m0 + M - 1 <= L; ++m0)
            for (std::int64_t n0 = 1; n0 + M - 1 <= L; ++n0) {
                bool ok = false;
                for (std::int64_t dm = 0; dm < M && !ok; ++dm)
                    for (std::int64_t dn = 0; dn < M && !ok; ++dn) ok = g.at(n0 + dn, m0 + dm) >= eps;
                if (!ok) g.at(n0 + static_cast<std::int64_t>(rng() % M), m0 + static_cast<std::int64_t>(rng() % M)) = eps;
            }
        if (find_bad_square(g, eps, M)) continue;
        GridExtraction ex;
        try {
            ex = extract_syndetic_from_grid(g, eps, M);
        } catch (const std::logic_error&) {
            continue;
        }
        const Rational bound = eps / ((M + 1) * (M + 1));
        bool gap = true, guaranteed = true, all = true;
        for (std::size_t i = 0; i < ex.selections.size(); ++i) {
            const auto& s = ex.selections[i];
            // Recompute the row average from the grid rather than trusting the report.
            Rational sum = 0;
            for (std::int64_t n = 1; n <= s.N; ++n) sum += g.at(n, s.N);
            Rational avg = sum / s.N;
            if (i && s.N - ex.selections[i - 1].N > 2 * M) gap = false;
            if (s.guaranteed && avg < bound) guaranteed = false;
            if (avg < bound) all = false;
        }
        gaps_ok += gap && !ex.selections.empty();
        bound_ok += guaranteed;
        every_strip += all;
    }
    r.pass = gaps_ok == 100 && bound_ok == 100;
    r.detail = "gap <= 2M in " + std::to_string(gaps_ok) + "/100, bound on guaranteed strips in " + std::to_string(bound_ok) +
               "/100, bound on every strip in " + std::to_string(every_strip) + "/100";
    r.artifact = {{"gap_ok", gaps_ok}, {"bound_ok_guaranteed", bound_ok}, {"bound_ok_all_strips", every_strip}};
    return r;
}

// 6. Evens in [0, 10^4], symmetric pattern.
inline CriterionResult parity(const ReproOptions& o) {
    CriterionResult r{6, "evens in [0,10^4]: pattern count 0 for odd N, >= N/2 for even N <= 500; max_gap 2", false, "", 0, {}};
    IntegerSet E = IntegerSet::residue(0, 2, 0, 10000);
    const PQList pq{{1, 0}, {-1, 1}};
    auto series = pattern_series(E, pq, 500, o.jobs);
    int ok = 0;
    for (std::size_t i = 0; i < series.N.size(); ++i) {
        std::int64_t N = series.N[i], c = series.count[i];
        if (N == 0) continue;
        ok += N % 2 ? c == 0 : 2 * c >= N;
    }
    auto rep = syndetic_pattern_report(series);
    r.pass = ok == 500 && rep.max_gap == 2 && rep.verdict == SyndeticVerdict::syndetic_in_window;
    r.detail = std::to_string(ok) + "/500 N satisfy the dichotomy; max_gap " + std::to_string(rep.max_gap);
    json counts = json::array();
    for (std::size_t i = 0; i < series.N.size(); ++i) counts.push_back({series.N[i], series.count[i]});
    r.artifact = {{"counts", counts}, {"max_gap", rep.max_gap}};
    return r;
}

// 7. Multi-window mixing inequality on random chains.
inline CriterionResult mixing_inequality(const ReproOptions& o) {
    CriterionResult r{7, "mixing inequality on 100 random Markov chains (s <= 4, horizon <= 2)", false, "", 0, json::array()};
    std::mt19937_64 rng(o.seed * 1000003 + 7);
    int ok = 0;
    for (int t = 0; t < 100; ++t) {
        int s = 2 + static_cast<int>(rng() % 3);
        int h = static_cast<int>(rng() % 3);
        MarkovShift chain(random_stochastic_matrix(s, rng));
        std::vector<WindowEvent> G;
        std::int64_t at = 0;
        int k = 2 + static_cast<int>(rng() % 3);
        for (int i = 0; i < k; ++i) {
            std::int64_t len = static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(h + 1));
            G.push_back(random_window_event(s, at, at + len, rng));
            at += len + 1 + static_cast<std::int64_t>(rng() % 4);
        }
        auto c = mixing_inequality_check(chain, G, h);
        ok += c.holds;
        r.artifact.push_back({{"states", s}, {"horizon", h}, {"events", k}, {"lhs", rational_to_json(c.lhs)},
                              {"rhs", rational_to_json(c.rhs)}, {"holds", c.holds}});
    }
    r.pass = ok == 100;
    r.detail = std::to_string(ok) + "/100 instances hold";
    return r;
}

// 8. Spectral levels and the sampled bound.
inline CriterionResult spectral(const ReproOptions& o) {
    CriterionResult r{8, "spectral levels for eps = 1/10: N = [1, 50, 125000]; sampled bound <= 1/10 at k <= 2", false, "", 0, {}};
    auto c = spectral_levels(q(1, 10), 2);
    bool levels = c.N.size() == 3 && c.N[0] == 1 && c.N[1] == 50 && c.N[2] == 125000;
    bool bound = true;
    json checks = json::array();
    std::string d = std::string("levels ") + (levels ? "match" : "differ");
    for (int k = 1; k <= 2; ++k) {
        auto v = verify_spectral_bound(c, k, 1000, o.seed * 1000003 + 8 + k);
        bound = bound && v.holds && !v.truncated;
        d += "; k=" + std::to_string(k) + ": max deviation " + str(v.max_deviation) + " over " + std::to_string(v.samples) +
             " u and n <= " + std::to_string(v.n_checked);
        checks.push_back({{"k", k}, {"samples", v.samples}, {"n_checked", v.n_checked}, {"max_deviation", rational_to_json(v.max_deviation)},
                          {"holds", v.holds}});
    }
    json N = json::array();
    for (const auto& x : c.N) N.push_back(x.get_str());
    r.pass = levels && bound;
    r.detail = d;
    r.artifact = {{"N", N}, {"checks", checks}};
    return r;
}

// 9. PET descent on the corpus.
inline CriterionResult pet_corpus(const ReproOptions& o) {
    CriterionResult r{9, "PET descent on the 50-case corpus: every trace terminates with a strictly preceding chain", false, "", 0, json::array()};
    std::ifstream in(o.pet_corpus);
    if (!in) {
        r.detail = "cannot read corpus '" + o.pet_corpus + "'";
        return r;
    }
    int cases = 0, finished = 0, capped = 0, broken = 0;
    for (std::string line; std::getline(in, line);) {
        if (line.empty() || line[0] == '#') continue;
        ++cases;
        json row{{"system", line}};
        try {
            auto trace = pet::pet_trace(pet::parse_system(line));
            bool desc = true;
            for (std::size_t i = 1; i < trace.chain.size(); ++i) desc = desc && pet::precedes(trace.chain[i], trace.chain[i - 1]);
            bool ends = trace.ends_at_base || pet::all_degree_one(trace.final_system);
            if (desc && ends) ++finished;
            else ++broken;
            row["steps"] = trace.steps.size();
            row["final_elements"] = trace.final_system.size();
            row["status"] = desc && ends ? "terminated" : "descent-violated";
        } catch (const resource_error& e) {
            ++capped;
            row["status"] = "cap";
            row["message"] = e.what();
        }
        r.artifact.push_back(row);
    }
    r.pass = cases == 50 && finished == 50;
    r.detail = std::to_string(finished) + "/" + std::to_string(cases) + " terminate; " + std::to_string(capped) +
               " hit the element cap (tower-sized descent); " + std::to_string(broken) + " broke descent";
    return r;
}

// 10. Root counting bound for small values.
inline CriterionResult small_values(const ReproOptions& o) {
    CriterionResult r{10, "count_small_values <= (2K+1) deg_n on 500 random (P, K, N) with deg_n <= 4", false, "", 0, {}};
    std::mt19937_64 rng(o.seed * 1000003 + 10);
    std::uniform_int_distribution<int> coef(-5, 5);
    int ok = 0, done = 0;
    while (done < 500) {
        int dn = 1 + static_cast<int>(rng() % 4), dN = static_cast<int>(rng() % 3);
        IntPoly2 p;
        for (int i = 0; i <= dn; ++i)
            for (int j = 0; j <= dN; ++j) p += IntPoly2::binom(i, j, coef(rng));
        if (!p.depends_on_n()) continue;
        long K = static_cast<long>(rng() % 21);
        std::int64_t N = 1 + static_cast<std::int64_t>(rng() % 2000);
        auto c = count_small_values(p, K, N);
        ok += c.count <= *c.bound;
        ++done;
    }
    r.pass = ok == 500;
    r.detail = std::to_string(ok) + "/500 within the bound";
    r.artifact = {{"within_bound", ok}, {"trials", done}};
    return r;
}

// 11. Lattice action with z_j = p_j, zhat_j = q_j against the single shift.
inline CriterionResult lattice_consistency(const ReproOptions& o) {
    CriterionResult r{11, "Bernoulli(1/2): lattice-action recurrence series equals the single-T series for N <= 128", true, "", 0, json::array()};
    BernoulliShift b({q(1, 2), q(1, 2)});
    BernoulliLattice line({q(1, 2), q(1, 2)}, 1);
    const std::vector<PQList> specs{{{1, 0}, {-1, 1}}, {{1, 0}, {2, 1}}, {{1, 0}, {2, 1}, {-1, 2}}};
    int idx = 0;
    for (const auto& pq : specs) {
        auto single = recurrence_series(recurrence_spec(b, b.cylinder({{0, 1}, {1, 1}}), pq), 128, {o.jobs, 100000});
        std::vector<Site> z, zh;
        for (auto [p, qq] : pq) {
            z.push_back(site(p));
            zh.push_back(site(qq));
        }
        LatticeAction<BernoulliLattice> act(line, z, zh);
        auto lat = recurrence_series(recurrence_spec(act, line.cylinder({{site(0), 1}, {site(1), 1}})), 128, {o.jobs, 100000});
        bool eq = single.S == lat.S;
        r.pass = r.pass && eq;
        r.detail += (idx++ ? "; " : "") + single.description + (eq ? " equal" : " DIFFER");
        r.artifact.push_back({{"spec", single.description}, {"equal", eq}, {"S", rationals(single.S)}});
    }
    return r;
}

}  // namespace detail

inline const std::vector<std::function<CriterionResult(const ReproOptions&)>>& criteria() {
    static const std::vector<std::function<CriterionResult(const ReproOptions&)>> all{
        detail::counterexample, detail::distinct_slopes,       detail::closed_form, detail::compact_syndetic,
        detail::grid_extraction, detail::parity,           detail::mixing_inequality, detail::spectral,
        detail::pet_corpus,      detail::small_values,     detail::lattice_consistency};
    return all;
}

/// Runs the selected criteria in order; `on_result` sees each one as it finishes.
inline std::vector<CriterionResult> run(const ReproOptions& o, const std::function<void(const CriterionResult&)>& on_result = {}) {
    for (int id : o.only)
        if (id < 1 || id > static_cast<int>(criteria().size())) throw argument_error("no criterion " + std::to_string(id));
    std::vector<CriterionResult> out;
    for (std::size_t i = 0; i < criteria().size(); ++i) {
        const int id = static_cast<int>(i) + 1;
        if (!o.only.empty() && !o.only.count(id)) continue;
        auto t0 = std::chrono::steady_clock::now();
        CriterionResult r;
        try {
            r = criteria()[i](o);
        } catch (const std::exception& e) {
            r = CriterionResult{id, "criterion " + std::to_string(id), false, std::string("exception: ") + e.what(), 0, {}};
        }
        r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (on_result) on_result(r);
        out.push_back(std::move(r));
    }
    return out;
}

inline std::string format_line(const CriterionResult& r) {
    std::ostringstream s;
    s << "criterion " << (r.id < 10 ? " " : "") << r.id << ": " << (r.pass ? "PASS" : "FAIL") << "  " << r.title << "  [" << r.detail
      << "]";
    return s.str();
}

}  // namespace ergo::repro
