#pragma once

// PET-induction bookkeeping for polynomial expressions over a free abelian group.
//
// A PExpr is the formal product T_1^{P_1(n)} ... T_k^{P_k(n)} * That_1^{Q_1(N)} ... That_k^{Q_k(N)}.
// The N-dependent half rides along through every reduction and is never
// inspected by the weight logic. The engine certifies only the combinatorial
// descent of weight matrices; the analytic limit lives in averages.hpp.

#include "ergo/intpoly.hpp"
#include "ergo/polyparse.hpp"

#include <algorithm>
#include <compare>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace ergo::pet {

/// (r, d): r is the largest generator index (1-based) whose n-exponent is
/// nonconstant, d its degree. Ordered lexicographically: r first, then d.
struct Weight {
    int r = 0;
    int d = 0;
    auto operator<=>(const Weight&) const = default;
};

class PExpr {
public:
    PExpr() = default;

    /// Exponents are normalized to vanish at 0 (constant terms dropped).
    PExpr(std::vector<IntPoly2> n_part, std::vector<IntPoly2> N_part) : n_part_(std::move(n_part)), N_part_(std::move(N_part)) {
        if (N_part_.empty()) N_part_.resize(n_part_.size());
        if (n_part_.size() != N_part_.size()) throw argument_error("PExpr: n and N exponent lists differ in length");
        for (std::size_t i = 0; i < n_part_.size(); ++i) {
            if (n_part_[i].depends_on_N())
                throw argument_error("PExpr: n-exponent #" + std::to_string(i + 1) + " depends on N");
            if (N_part_[i].depends_on_n())
                throw argument_error("PExpr: N-exponent #" + std::to_string(i + 1) + " depends on n");
            n_part_[i] -= IntPoly2::constant(n_part_[i].constant_term());
            N_part_[i] -= IntPoly2::constant(N_part_[i].constant_term());
        }
    }

    /// T_1^{e_1(n)} ... T_k^{e_k(n)} with trivial N part.
    static PExpr from_n(std::vector<IntPoly2> n_part) { return PExpr(std::move(n_part), {}); }

    std::size_t generators() const { return n_part_.size(); }
    const std::vector<IntPoly2>& n_part() const { return n_part_; }
    const std::vector<IntPoly2>& N_part() const { return N_part_; }

    bool constant_in_n() const {
        return std::all_of(n_part_.begin(), n_part_.end(), [](const IntPoly2& p) { return p.is_zero(); });
    }

    bool is_identity() const {
        return constant_in_n() &&
               std::all_of(N_part_.begin(), N_part_.end(), [](const IntPoly2& p) { return p.is_zero(); });
    }

    int degree() const {
        int d = 0;
        for (const auto& p : n_part_) d = std::max(d, p.deg_n());
        return d;
    }

    friend PExpr operator*(const PExpr& a, const PExpr& b) {
        a.require_same_rank(b);
        PExpr out = a;
        for (std::size_t i = 0; i < a.generators(); ++i) {
            out.n_part_[i] += b.n_part_[i];
            out.N_part_[i] += b.N_part_[i];
        }
        return out;
    }

    PExpr inverse() const {
        PExpr out = *this;
        for (auto& p : out.n_part_) p = -p;
        for (auto& p : out.N_part_) p = -p;
        return out;
    }

    /// Phi(n+h, N) * phi(h)^{-1}: n-exponents P(n+h) - P(h), N part unchanged.
    PExpr shifted(const BigInt& h) const {
        PExpr out = *this;
        for (auto& p : out.n_part_) p = p.shift_n(h) - IntPoly2::constant(p.eval(h, 0));
        return out;
    }

    friend bool operator==(const PExpr& a, const PExpr& b) {
        return a.n_part_ == b.n_part_ && a.N_part_ == b.N_part_;
    }

    /// Lexicographic order on exponent coefficient vectors (used for tie-breaks).
    friend bool operator<(const PExpr& a, const PExpr& b) {
        if (a.n_part_ != b.n_part_) return a.n_part_ < b.n_part_;
        return a.N_part_ < b.N_part_;
    }

    std::string to_string() const {
        std::string s;
        for (std::size_t i = 0; i < generators(); ++i) {
            if (!n_part_[i].is_zero()) s += "T" + std::to_string(i + 1) + "^{" + n_part_[i].to_string() + "}";
        }
        for (std::size_t i = 0; i < generators(); ++i) {
            if (!N_part_[i].is_zero()) s += "U" + std::to_string(i + 1) + "^{" + N_part_[i].to_string() + "}";
        }
        return s.empty() ? "id" : s;
    }

private:
    void require_same_rank(const PExpr& o) const {
        if (generators() != o.generators()) throw argument_error("PExpr: generator counts differ");
    }

    std::vector<IntPoly2> n_part_;
    std::vector<IntPoly2> N_part_;
};

inline Weight weight(const PExpr& e) {
    for (int r = static_cast<int>(e.generators()); r >= 1; --r) {
        const auto& p = e.n_part()[r - 1];
        if (p.deg_n() >= 1) return {r, p.deg_n()};
    }
    throw domain_error("no weight: expression " + e.to_string() + " is constant in n");
}

inline Rational leading_coefficient(const PExpr& e) {
    Weight w = weight(e);
    return e.n_part()[w.r - 1].leading_coefficient_n();
}

inline bool equivalent(const PExpr& a, const PExpr& b) {
    Weight wa = weight(a), wb = weight(b);
    return wa == wb && leading_coefficient(a) == leading_coefficient(b);
}

/// Counts N_{rd} of equivalence classes per weight, 1 <= r <= k, 1 <= d <= D.
class WeightMatrix {
public:
    WeightMatrix() = default;
    WeightMatrix(int k, int D) : k_(k), D_(D), entries_(static_cast<std::size_t>(k) * D, 0) {}

    int rows() const { return k_; }
    int cols() const { return D_; }

    long at(int r, int d) const {
        if (r < 1 || d < 1 || r > k_ || d > D_) return 0;
        return entries_[static_cast<std::size_t>(r - 1) * D_ + (d - 1)];
    }

    void set(int r, int d, long v) {
        if (r < 1 || d < 1 || r > k_ || d > D_) throw argument_error("WeightMatrix index out of range");
        entries_[static_cast<std::size_t>(r - 1) * D_ + (d - 1)] = v;
    }

    /// Single class at (1,1), nothing else: the base case of the induction.
    bool is_base() const {
        for (int r = 1; r <= k_; ++r)
            for (int d = 1; d <= D_; ++d)
                if (at(r, d) != ((r == 1 && d == 1) ? 1 : 0)) return false;
        return k_ >= 1 && D_ >= 1;
    }

    long total() const {
        long t = 0;
        for (long v : entries_) t += v;
        return t;
    }

    friend bool operator==(const WeightMatrix& a, const WeightMatrix& b) {
        const int k = std::max(a.k_, b.k_), D = std::max(a.D_, b.D_);
        for (int r = 1; r <= k; ++r)
            for (int d = 1; d <= D; ++d)
                if (a.at(r, d) != b.at(r, d)) return false;
        return true;
    }

    std::vector<std::vector<long>> to_rows() const {
        std::vector<std::vector<long>> out(k_, std::vector<long>(D_));
        for (int r = 1; r <= k_; ++r)
            for (int d = 1; d <= D_; ++d) out[r - 1][d - 1] = at(r, d);
        return out;
    }

private:
    int k_ = 0;
    int D_ = 0;
    std::vector<long> entries_;
};

inline WeightMatrix weight_matrix(const std::vector<PExpr>& sys, int min_cols = 1) {
    int k = 0, D = min_cols;
    for (const auto& e : sys) {
        k = std::max(k, static_cast<int>(e.generators()));
        D = std::max(D, weight(e).d);
    }
    WeightMatrix m(std::max(k, 1), D);
    // Classes: distinct (weight, leading coefficient) pairs.
    std::vector<std::pair<Weight, Rational>> classes;
    for (const auto& e : sys) {
        std::pair<Weight, Rational> key{weight(e), leading_coefficient(e)};
        if (std::find(classes.begin(), classes.end(), key) == classes.end()) {
            classes.push_back(key);
            m.set(key.first.r, key.first.d, m.at(key.first.r, key.first.d) + 1);
        }
    }
    return m;
}

/// `earlier` precedes `later`: for some (r0,d0) the earlier matrix has exactly
/// one class fewer at (r0,d0), agrees with the later one at every weight above
/// (r0,d0) in the weight order, and is unconstrained below it.
inline bool precedes(const WeightMatrix& earlier, const WeightMatrix& later) {
    const int k = std::max(earlier.rows(), later.rows());
    const int D = std::max(earlier.cols(), later.cols());
    // Scan weights from the top; the first disagreement must be the decrement.
    for (int r = k; r >= 1; --r) {
        for (int d = D; d >= 1; --d) {
            long a = earlier.at(r, d), b = later.at(r, d);
            if (a == b) continue;
            return a == b - 1;
        }
    }
    return false;
}

/// True when every element is nonconstant in n and every pairwise quotient is too.
/// Returns a description of the first failure, or nullopt.
inline std::optional<std::string> hypothesis_failure(const std::vector<PExpr>& sys) {
    for (std::size_t i = 0; i < sys.size(); ++i)
        if (sys[i].constant_in_n()) return "element #" + std::to_string(i) + " (" + sys[i].to_string() + ") is constant in n";
    // Constant terms are normalized away, so a quotient is n-constant exactly
    // when the n-parts coincide. Sorting finds such pairs in O(s log s).
    std::vector<std::size_t> idx(sys.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        return sys[a].n_part() != sys[b].n_part() ? sys[a].n_part() < sys[b].n_part() : a < b;
    });
    for (std::size_t t = 1; t < idx.size(); ++t) {
        std::size_t i = idx[t - 1], j = idx[t];
        if (sys[i].n_part() == sys[j].n_part())
            return "elements #" + std::to_string(i) + " and #" + std::to_string(j) + " (" + sys[i].to_string() +
                   ", " + sys[j].to_string() + ") differ by an n-constant factor";
    }
    return std::nullopt;
}

inline bool all_degree_one(const std::vector<PExpr>& sys) {
    return std::all_of(sys.begin(), sys.end(), [](const PExpr& e) { return e.degree() == 1; });
}

struct ReductionStep {
    BigInt h;
    std::vector<PExpr> auxiliary;  // the system {Phi_i(n,N), Phi_i(n+h,N) phi_i(h)^{-1}}
    std::size_t pivot = 0;         // index into auxiliary
    std::vector<PExpr> reduced;    // auxiliary elements times pivot^{-1}, pivot dropped
    WeightMatrix before;
    WeightMatrix after;
};

/// Minimal weight; ties broken by the lexicographic order on exponents.
inline std::size_t auto_pivot(const std::vector<PExpr>& aux) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < aux.size(); ++i) {
        Weight wi = weight(aux[i]), wb = weight(aux[best]);
        if (wi < wb || (wi == wb && aux[i] < aux[best])) best = i;
    }
    return best;
}

/// One PET step A -> A_h. Throws argument_error when the input violates the
/// hypotheses, retryable_error when h is too small for the shifted family to
/// stay pairwise distinct.
inline ReductionStep reduce_step(const std::vector<PExpr>& sys, const BigInt& h,
                                 std::optional<std::size_t> pivot = std::nullopt) {
    if (sys.empty()) throw argument_error("reduce_step: empty system");
    if (h < 1) throw argument_error("reduce_step: h must be >= 1");
    if (auto why = hypothesis_failure(sys)) throw argument_error("reduce_step hypotheses fail: " + *why);

    ReductionStep step;
    step.h = h;
    step.before = weight_matrix(sys);
    for (const auto& e : sys) {
        step.auxiliary.push_back(e);
        // Degree-1 members absorb the shift: phi(n+h) = phi(n) phi(h).
        if (e.degree() >= 2) step.auxiliary.push_back(e.shifted(h));
    }
    if (auto why = hypothesis_failure(step.auxiliary))
        throw retryable_error("shift h=" + h.get_str() + " too small: " + *why + "; retry with a larger h");

    step.pivot = pivot.value_or(auto_pivot(step.auxiliary));
    if (step.pivot >= step.auxiliary.size()) throw argument_error("reduce_step: pivot index out of range");
    const PExpr pivot_inv = step.auxiliary[step.pivot].inverse();
    for (std::size_t i = 0; i < step.auxiliary.size(); ++i) {
        if (i == step.pivot) continue;
        step.reduced.push_back(step.auxiliary[i] * pivot_inv);
    }
    if (auto why = hypothesis_failure(step.reduced))
        throw retryable_error("shift h=" + h.get_str() + " too small: reduced " + *why);
    step.after = weight_matrix(step.reduced);
    if (!step.reduced.empty() && !precedes(step.after, step.before))
        throw domain_error("reduce_step: weight matrix did not descend (pivot is not of minimal weight?)");
    return step;
}

struct PetTrace {
    std::vector<WeightMatrix> chain;
    std::vector<ReductionStep> steps;
    std::vector<PExpr> final_system;
    bool ends_at_base = false;  // final matrix is the base case (single class at (1,1))
};

struct PetOptions {
    long max_steps = 1000000;
    long max_h = 10000;
    std::size_t max_elements = 2048;  // the descent is well-founded but can be tower-sized
};

/// Iterates reduce_step until every element has degree 1. h for step i is
/// h_schedule[i] when given, otherwise the smallest h >= 1 that works.
inline PetTrace pet_trace(const std::vector<PExpr>& sys, const std::vector<BigInt>& h_schedule = {},
                          const PetOptions& opt = {}) {
    if (auto why = hypothesis_failure(sys)) throw argument_error("pet_trace hypotheses fail: " + *why);
    PetTrace trace;
    std::vector<PExpr> current = sys;
    trace.chain.push_back(weight_matrix(current));
    for (long i = 0; !all_degree_one(current); ++i) {
        if (i >= opt.max_steps) throw resource_error("pet_trace exceeded " + std::to_string(opt.max_steps) + " steps");
        std::optional<ReductionStep> step;
        if (static_cast<std::size_t>(i) < h_schedule.size()) {
            step = reduce_step(current, h_schedule[i]);
        } else {
            for (long h = 1; h <= opt.max_h && !step; ++h) {
                try {
                    step = reduce_step(current, h);
                } catch (const retryable_error&) {
                }
            }
            if (!step) throw resource_error("pet_trace: no admissible h <= " + std::to_string(opt.max_h));
        }
        current = step->reduced;
        if (current.size() > opt.max_elements)
            throw resource_error("pet_trace: system grew to " + std::to_string(current.size()) + " elements after " +
                                 std::to_string(i + 1) + " steps");
        trace.chain.push_back(step->after);
        trace.steps.push_back(std::move(*step));
    }
    trace.final_system = current;
    trace.ends_at_base = trace.chain.back().is_base();
    return trace;
}

/// "n^3, 0 ; n, n": elements separated by ';', generator exponents within an
/// element by ','. Shorter elements are padded with zero exponents.
inline std::vector<PExpr> parse_system(const std::string& text) {
    std::vector<std::vector<IntPoly2>> rows;
    std::size_t k = 0;
    std::stringstream ss(text);
    for (std::string el; std::getline(ss, el, ';');) {
        if (el.find_first_not_of(" \t") == std::string::npos) throw argument_error("empty element in system '" + text + "'");
        std::vector<IntPoly2> g;
        std::stringstream es(el);
        for (std::string t; std::getline(es, t, ',');) g.push_back(parse_intpoly(t));
        k = std::max(k, g.size());
        rows.push_back(std::move(g));
    }
    if (rows.empty()) throw argument_error("empty system");
    std::vector<PExpr> sys;
    for (auto& g : rows) {
        g.resize(k);
        sys.push_back(PExpr::from_n(std::move(g)));
    }
    return sys;
}

}  // namespace ergo::pet
