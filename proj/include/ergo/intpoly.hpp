#pragma once

// Bivariate integer-valued polynomials P(n, N).
//
// Coefficients live in the binomial basis C(n,i)*C(N,j). Integer coefficients
// in this basis are exactly the integer-valued polynomials, so integrality on
// integer inputs is a representation invariant rather than a runtime check.

#include "ergo/core.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace ergo {

/// Degree pair (i, j): exponent of n and of N.
using DegreePair = std::pair<int, int>;

/// Polynomial in the monomial basis n^i N^j with rational coefficients.
using MonomialPoly = std::map<DegreePair, Rational>;

namespace detail {

/// Stirling numbers of the second kind S(i, k), 0 <= k <= i <= d.
inline const std::vector<std::vector<BigInt>>& stirling2(int d) {
    static thread_local std::vector<std::vector<BigInt>> table{{BigInt(1)}};
    while (static_cast<int>(table.size()) <= d) {
        const int i = static_cast<int>(table.size());
        std::vector<BigInt> row(i + 1, BigInt(0));
        for (int k = 1; k <= i; ++k) {
            BigInt prev_same = k < i ? table[i - 1][k] : BigInt(0);
            row[k] = BigInt(k) * prev_same + table[i - 1][k - 1];
        }
        table.push_back(std::move(row));
    }
    return table;
}

/// Signed Stirling numbers of the first kind s(k, i): C(n,k) * k! = sum_i s(k,i) n^i.
inline const std::vector<std::vector<BigInt>>& stirling1(int d) {
    static thread_local std::vector<std::vector<BigInt>> table{{BigInt(1)}};
    while (static_cast<int>(table.size()) <= d) {
        const int k = static_cast<int>(table.size());
        std::vector<BigInt> row(k + 1, BigInt(0));
        // n(n-1)...(n-k+1) = [n(n-1)...(n-k+2)] * (n - (k-1))
        for (int i = 0; i < k; ++i) {
            row[i + 1] += table[k - 1][i];
            row[i] -= BigInt(k - 1) * table[k - 1][i];
        }
        table.push_back(std::move(row));
    }
    return table;
}

inline BigInt factorial(int k) {
    BigInt f;
    mpz_fac_ui(f.get_mpz_t(), static_cast<unsigned long>(k));
    return f;
}

/// Generalized binomial coefficient C(x, k) for any integer x.
inline BigInt binomial(const BigInt& x, int k) {
    if (k < 0) return 0;
    BigInt r;
    mpz_bin_ui(r.get_mpz_t(), x.get_mpz_t(), static_cast<unsigned long>(k));
    return r;
}

inline void add_term(MonomialPoly& p, DegreePair key, const Rational& c) {
    if (c == 0) return;
    auto [it, inserted] = p.try_emplace(key, c);
    if (!inserted) {
        it->second += c;
        if (it->second == 0) p.erase(it);
    }
}

}  // namespace detail

inline MonomialPoly operator*(const MonomialPoly& a, const MonomialPoly& b) {
    MonomialPoly out;
    for (const auto& [ka, ca] : a)
        for (const auto& [kb, cb] : b)
            detail::add_term(out, {ka.first + kb.first, ka.second + kb.second}, ca * cb);
    return out;
}

inline MonomialPoly operator+(MonomialPoly a, const MonomialPoly& b) {
    for (const auto& [k, c] : b) detail::add_term(a, k, c);
    return a;
}

inline MonomialPoly operator-(const MonomialPoly& a) {
    MonomialPoly out;
    for (const auto& [k, c] : a) out.emplace(k, -c);
    return out;
}

inline std::string to_string(const MonomialPoly& p) {
    if (p.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    // Highest total degree first reads most naturally.
    std::vector<std::pair<DegreePair, Rational>> terms(p.begin(), p.end());
    std::stable_sort(terms.begin(), terms.end(), [](const auto& x, const auto& y) {
        int dx = x.first.first + x.first.second, dy = y.first.first + y.first.second;
        if (dx != dy) return dx > dy;
        return x.first.first > y.first.first;
    });
    for (const auto& [key, coeff] : terms) {
        Rational c = coeff;
        if (first) {
            if (c < 0) os << "-";
        } else {
            os << (c < 0 ? " - " : " + ");
        }
        first = false;
        c = abs(c);
        std::vector<std::string> factors;
        const bool unit = (c == 1);
        if (!unit || (key.first == 0 && key.second == 0)) factors.push_back(c.get_str());
        auto power = [](const char* var, int e) {
            return e == 1 ? std::string(var) : std::string(var) + "^" + std::to_string(e);
        };
        if (key.first > 0) factors.push_back(power("n", key.first));
        if (key.second > 0) factors.push_back(power("N", key.second));
        for (std::size_t i = 0; i < factors.size(); ++i) os << (i ? "*" : "") << factors[i];
    }
    return os.str();
}

/// Integer-valued polynomial in (n, N), stored in the binomial basis.
class IntPoly2 {
public:
    using Coeffs = std::map<DegreePair, BigInt>;

    IntPoly2() = default;

    static IntPoly2 constant(const BigInt& c) { return binom(0, 0, c); }

    /// c * C(n, i) * C(N, j)
    static IntPoly2 binom(int i, int j, const BigInt& c = 1) {
        if (i < 0 || j < 0) throw argument_error("negative binomial degree");
        IntPoly2 p;
        if (c != 0) p.coeffs_.emplace(DegreePair{i, j}, c);
        return p;
    }

    static IntPoly2 n() { return binom(1, 0); }
    static IntPoly2 N() { return binom(0, 1); }

    /// p*n + q*N
    static IntPoly2 linear(const BigInt& p, const BigInt& q) { return binom(1, 0, p) + binom(0, 1, q); }

    /// Converts from the monomial basis; throws argument_error when the
    /// polynomial does not take integer values on all integer pairs.
    static IntPoly2 from_monomial(const MonomialPoly& mono) {
        int dn = 0, dN = 0;
        for (const auto& [k, c] : mono) {
            dn = std::max(dn, k.first);
            dN = std::max(dN, k.second);
        }
        const auto& s2 = detail::stirling2(std::max(dn, dN));
        std::map<DegreePair, Rational> acc;
        // n^i = sum_k S(i,k) k! C(n,k)
        for (const auto& [key, c] : mono) {
            auto [i, j] = key;
            for (int k = 0; k <= i; ++k) {
                if (s2[i][k] == 0) continue;
                for (int l = 0; l <= j; ++l) {
                    if (s2[j][l] == 0) continue;
                    BigInt w = s2[i][k] * detail::factorial(k) * s2[j][l] * detail::factorial(l);
                    acc[{k, l}] += c * Rational(w);
                }
            }
        }
        IntPoly2 p;
        for (auto& [key, c] : acc) {
            c.canonicalize();
            if (c == 0) continue;
            if (c.get_den() != 1)
                throw argument_error("polynomial '" + ergo::to_string(mono) +
                                     "' is not integer-valued on integers");
            p.coeffs_.emplace(key, c.get_num());
        }
        return p;
    }

    MonomialPoly to_monomial() const {
        int d = 0;
        for (const auto& [k, c] : coeffs_) d = std::max({d, k.first, k.second});
        const auto& s1 = detail::stirling1(d);
        MonomialPoly out;
        for (const auto& [key, c] : coeffs_) {
            auto [k, l] = key;
            Rational scale(c, detail::factorial(k) * detail::factorial(l));
            scale.canonicalize();
            for (int i = 0; i <= k; ++i) {
                if (s1[k][i] == 0) continue;
                for (int j = 0; j <= l; ++j) {
                    if (s1[l][j] == 0) continue;
                    detail::add_term(out, {i, j}, scale * Rational(s1[k][i] * s1[l][j]));
                }
            }
        }
        return out;
    }

    const Coeffs& coeffs() const { return coeffs_; }

    bool is_zero() const { return coeffs_.empty(); }

    bool is_constant() const {
        return coeffs_.empty() || (coeffs_.size() == 1 && coeffs_.begin()->first == DegreePair{0, 0});
    }

    /// Constant term; only meaningful for constant polynomials.
    BigInt constant_term() const {
        auto it = coeffs_.find({0, 0});
        return it == coeffs_.end() ? BigInt(0) : it->second;
    }

    int deg_n() const {
        int d = 0;
        for (const auto& [k, c] : coeffs_) d = std::max(d, k.first);
        return d;
    }

    int deg_N() const {
        int d = 0;
        for (const auto& [k, c] : coeffs_) d = std::max(d, k.second);
        return d;
    }

    bool depends_on_n() const {
        return std::any_of(coeffs_.begin(), coeffs_.end(), [](const auto& kv) { return kv.first.first >= 1; });
    }

    bool depends_on_N() const {
        return std::any_of(coeffs_.begin(), coeffs_.end(), [](const auto& kv) { return kv.first.second >= 1; });
    }

    /// True for p*n + Q(N): degree one in n with an N-independent n-coefficient.
    bool is_linear_in_n() const {
        bool has_n = false;
        for (const auto& [k, c] : coeffs_) {
            if (k.first >= 2 || (k.first == 1 && k.second > 0)) return false;
            if (k.first == 1) has_n = true;
        }
        return has_n;
    }

    /// Coefficient of n in p*n + Q(N); requires is_linear_in_n().
    BigInt n_coefficient() const {
        auto it = coeffs_.find({1, 0});
        return it == coeffs_.end() ? BigInt(0) : it->second;
    }

    /// Coefficient of n^deg_n in the monomial basis, for polynomials in n only.
    Rational leading_coefficient_n() const {
        if (depends_on_N()) throw argument_error("leading_coefficient_n requires a polynomial in n only");
        const int d = deg_n();
        auto it = coeffs_.find({d, 0});
        if (it == coeffs_.end()) return 0;
        Rational q(it->second, detail::factorial(d));
        q.canonicalize();
        return q;
    }

    BigInt eval(const BigInt& n, const BigInt& N) const {
        BigInt total = 0;
        for (const auto& [k, c] : coeffs_) total += c * detail::binomial(n, k.first) * detail::binomial(N, k.second);
        return total;
    }

    std::int64_t eval64(std::int64_t n, std::int64_t N) const { return to_int64(eval(BigInt(n), BigInt(N))); }

    /// P(n + h, N), via Vandermonde: C(n+h, i) = sum_k C(h, i-k) C(n, k).
    IntPoly2 shift_n(const BigInt& h) const {
        IntPoly2 out;
        for (const auto& [key, c] : coeffs_) {
            auto [i, j] = key;
            for (int k = 0; k <= i; ++k) out.add({k, j}, c * detail::binomial(h, i - k));
        }
        return out;
    }

    IntPoly2& operator+=(const IntPoly2& o) {
        for (const auto& [k, c] : o.coeffs_) add(k, c);
        return *this;
    }
    IntPoly2& operator-=(const IntPoly2& o) {
        for (const auto& [k, c] : o.coeffs_) add(k, -c);
        return *this;
    }
    friend IntPoly2 operator+(IntPoly2 a, const IntPoly2& b) { return a += b; }
    friend IntPoly2 operator-(IntPoly2 a, const IntPoly2& b) { return a -= b; }
    friend IntPoly2 operator-(const IntPoly2& a) { return IntPoly2{} - a; }
    friend IntPoly2 operator*(const BigInt& s, const IntPoly2& a) {
        IntPoly2 out;
        if (s == 0) return out;
        for (const auto& [k, c] : a.coeffs_) out.coeffs_.emplace(k, s * c);
        return out;
    }
    friend IntPoly2 operator*(const IntPoly2& a, const IntPoly2& b) {
        return from_monomial(a.to_monomial() * b.to_monomial());
    }
    friend bool operator==(const IntPoly2& a, const IntPoly2& b) { return a.coeffs_ == b.coeffs_; }
    friend bool operator<(const IntPoly2& a, const IntPoly2& b) { return a.coeffs_ < b.coeffs_; }

    std::string to_string() const { return ergo::to_string(to_monomial()); }

private:
    void add(DegreePair k, const BigInt& c) {
        if (c == 0) return;
        auto [it, inserted] = coeffs_.try_emplace(k, c);
        if (!inserted) {
            it->second += c;
            if (it->second == 0) coeffs_.erase(it);
        }
    }

    Coeffs coeffs_;
};

inline std::string to_string(const IntPoly2& p) { return p.to_string(); }

/// Every pairwise difference is nonconstant.
inline bool is_essentially_distinct(const std::vector<IntPoly2>& ps) {
    if (ps.size() < 2) throw argument_error("is_essentially_distinct needs at least two polynomials");
    for (std::size_t i = 0; i < ps.size(); ++i)
        for (std::size_t j = i + 1; j < ps.size(); ++j)
            if ((ps[i] - ps[j]).is_constant()) return false;
    return true;
}

inline bool depends_on_n(const IntPoly2& p) { return p.depends_on_n(); }

/// One constant-difference pair in the family {P_i(n,N)} u {P_i(n+h,N)}.
/// Members 0..k-1 are the originals, k..2k-1 the shifted copies.
struct ConstantDifferencePair {
    std::size_t first = 0;
    std::size_t second = 0;
    BigInt difference;  // second - first
};

struct ShiftedDistinctnessReport {
    BigInt h;
    std::vector<ConstantDifferencePair> exceptions;  // (P_i, P_i(.+h)) with P_i = p_i n + Q_i(N)
    std::vector<ConstantDifferencePair> violations;  // anything else: h is not large enough
    bool ok() const { return violations.empty(); }
};

inline void check_shift_family(const std::vector<IntPoly2>& ps) {
    if (ps.empty()) throw argument_error("empty polynomial family");
    for (std::size_t i = 0; i < ps.size(); ++i) {
        if (ps[i].is_constant()) throw argument_error("polynomial #" + std::to_string(i) + " is constant");
        if (!ps[i].depends_on_n())
            throw argument_error("polynomial #" + std::to_string(i) + " (" + ps[i].to_string() +
                                 ") does not depend on n");
    }
    if (ps.size() >= 2 && !is_essentially_distinct(ps))
        throw argument_error("polynomials are not pairwise essentially distinct");
}

inline ShiftedDistinctnessReport shifted_distinctness_report(const std::vector<IntPoly2>& ps, const BigInt& h) {
    if (h < 1) throw argument_error("shift h must be >= 1");
    check_shift_family(ps);
    const std::size_t k = ps.size();
    std::vector<IntPoly2> family(ps);
    for (const auto& p : ps) family.push_back(p.shift_n(h));

    ShiftedDistinctnessReport report;
    report.h = h;
    for (std::size_t a = 0; a < family.size(); ++a) {
        for (std::size_t b = a + 1; b < family.size(); ++b) {
            IntPoly2 diff = family[b] - family[a];
            if (!diff.is_constant()) continue;
            ConstantDifferencePair pair{a, b, diff.constant_term()};
            const bool own_shift = (b == a + k) && a < k;
            if (own_shift && ps[a].is_linear_in_n() && pair.difference == ps[a].n_coefficient() * h)
                report.exceptions.push_back(pair);
            else
                report.violations.push_back(pair);
        }
    }
    return report;
}

/// Smallest h in [1, cap] whose report has no violations.
inline std::optional<BigInt> minimal_admissible_shift(const std::vector<IntPoly2>& ps, long cap = 10000) {
    for (long h = 1; h <= cap; ++h)
        if (shifted_distinctness_report(ps, h).ok()) return BigInt(h);
    return std::nullopt;
}

struct SmallValueCount {
    std::int64_t count = 0;
    std::optional<BigInt> bound;  // (2K+1) * deg_n(P) when P depends on n
};

/// M_K(N) = #{1 <= n <= N : |P(n,N)| <= K}. For P independent of n the count is
/// N or 0 according to |P(N)| <= K.
inline SmallValueCount count_small_values(const IntPoly2& p, const BigInt& K, std::int64_t N) {
    if (K < 0) throw argument_error("K must be >= 0");
    if (N < 1) throw argument_error("N must be >= 1");
    SmallValueCount out;
    const BigInt bigN(N);
    if (!p.depends_on_n()) {
        BigInt v = p.eval(0, bigN);
        out.count = (v <= K && v >= -K) ? N : 0;
        return out;
    }
    for (std::int64_t n = 1; n <= N; ++n) {
        BigInt v = p.eval(BigInt(n), bigN);
        if (v <= K && v >= -K) ++out.count;
    }
    out.bound = (2 * K + 1) * p.deg_n();
    return out;
}

}  // namespace ergo
