#pragma once

// Shift spaces with exact cylinder algebras: Bernoulli and Markov shifts on
// A^Z, and product-Bernoulli on A^{Z^d}. A set is a disjoint union of basic
// cylinders; a basic cylinder fixes finitely many coordinates.
//
// Shift convention: (T w)_i = w_{i+1}, so T^{-k}{w_c = s} = {w_{c+k} = s}.

#include "ergo/core.hpp"

#include <algorithm>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace ergo {

template <class Coord>
struct Cylinder {
    std::vector<std::pair<Coord, int>> fixed;  // sorted by coordinate, unique

    static Cylinder of(std::vector<std::pair<Coord, int>> constraints) {
        std::sort(constraints.begin(), constraints.end());
        Cylinder c;
        for (auto& kv : constraints) {
            if (!c.fixed.empty() && c.fixed.back().first == kv.first) {
                if (c.fixed.back().second != kv.second)
                    throw argument_error("contradictory cylinder constraints; build the empty set instead");
                continue;
            }
            c.fixed.push_back(kv);
        }
        return c;
    }

    friend bool operator==(const Cylinder&, const Cylinder&) = default;
    friend bool operator<(const Cylinder& a, const Cylinder& b) { return a.fixed < b.fixed; }
};

namespace detail {

/// Merged constraints of a and b, or nothing when they contradict.
template <class Coord>
std::optional<Cylinder<Coord>> merge(const Cylinder<Coord>& a, const Cylinder<Coord>& b) {
    Cylinder<Coord> out;
    out.fixed.reserve(a.fixed.size() + b.fixed.size());
    std::size_t i = 0, j = 0;
    while (i < a.fixed.size() || j < b.fixed.size()) {
        if (j == b.fixed.size() || (i < a.fixed.size() && a.fixed[i].first < b.fixed[j].first)) {
            out.fixed.push_back(a.fixed[i++]);
        } else if (i == a.fixed.size() || b.fixed[j].first < a.fixed[i].first) {
            out.fixed.push_back(b.fixed[j++]);
        } else {
            if (a.fixed[i].second != b.fixed[j].second) return std::nullopt;
            out.fixed.push_back(a.fixed[i]);
            ++i;
            ++j;
        }
    }
    return out;
}

inline std::int64_t add_coord(std::int64_t c, std::int64_t k) { return c + k; }
inline Site add_coord(const Site& c, const Site& k) { return c + k; }

inline std::string coord_string(std::int64_t c) { return std::to_string(c); }
inline std::string coord_string(const Site& c) {
    std::string s = "(";
    for (int i = 0; i < kMaxLatticeDim; ++i) s += (i ? "," : "") + std::to_string(c[static_cast<std::size_t>(i)]);
    return s + ")";
}

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t hash_coord(std::uint64_t seed, std::int64_t c) {
    return splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(c)));
}
inline std::uint64_t hash_coord(std::uint64_t seed, const Site& c) {
    std::uint64_t h = seed;
    for (auto v : c) h = splitmix64(h ^ static_cast<std::uint64_t>(v));
    return h;
}

/// Inverse-CDF draw of a symbol from a uniform 64-bit word, using cumulative
/// probabilities rounded to doubles.
inline int draw_symbol(std::uint64_t word, const std::vector<double>& cdf) {
    double u = static_cast<double>(word >> 11) * 0x1.0p-53;
    for (std::size_t s = 0; s + 1 < cdf.size(); ++s)
        if (u < cdf[s]) return static_cast<int>(s);
    return static_cast<int>(cdf.size()) - 1;
}

inline std::vector<double> cumulative(const std::vector<Rational>& p) {
    std::vector<double> cdf;
    Rational acc = 0;
    for (const auto& q : p) {
        acc += q;
        cdf.push_back(acc.get_d());
    }
    return cdf;
}

inline void validate_distribution(const std::vector<Rational>& p, const std::string& what) {
    if (p.empty()) throw argument_error(what + ": empty probability vector");
    Rational total = 0;
    for (const auto& q : p) {
        if (q < 0) throw argument_error(what + ": negative probability " + q.get_str());
        total += q;
    }
    if (total != 1) throw argument_error(what + ": probabilities sum to " + total.get_str() + ", not 1");
}

}  // namespace detail

/// Disjoint union of basic cylinders. Contradictory pieces are dropped eagerly,
/// so an empty piece list is exactly the empty set.
template <class Coord>
class CylinderSet {
public:
    using cylinder_type = Cylinder<Coord>;

    CylinderSet() = default;
    explicit CylinderSet(cylinder_type c) : pieces_{std::move(c)} {}

    static CylinderSet whole() { return CylinderSet(cylinder_type{}); }

    const std::vector<cylinder_type>& pieces() const { return pieces_; }
    bool empty() const { return pieces_.empty(); }

    CylinderSet shifted(const Coord& k) const {
        CylinderSet out = *this;
        for (auto& c : out.pieces_)
            for (auto& kv : c.fixed) kv.first = detail::add_coord(kv.first, k);
        return out;
    }

    friend CylinderSet operator&(const CylinderSet& a, const CylinderSet& b) {
        CylinderSet out;
        for (const auto& x : a.pieces_)
            for (const auto& y : b.pieces_)
                if (auto m = detail::merge(x, y)) out.pieces_.push_back(std::move(*m));
        std::sort(out.pieces_.begin(), out.pieces_.end());
        return out;
    }

    /// Complement over an alphabet of the given size, again as a disjoint union.
    CylinderSet complement(int alphabet) const {
        CylinderSet out = whole();
        for (const auto& c : pieces_) {
            CylinderSet not_c;
            cylinder_type prefix;
            for (const auto& [coord, sym] : c.fixed) {
                for (int s = 0; s < alphabet; ++s) {
                    if (s == sym) continue;
                    cylinder_type piece = prefix;
                    piece.fixed.emplace_back(coord, s);
                    not_c.pieces_.push_back(std::move(piece));
                }
                prefix.fixed.emplace_back(coord, sym);
            }
            out = out & not_c;
        }
        return out;
    }

    /// Adds a piece known to be disjoint from the current ones.
    void add_disjoint(cylinder_type c) {
        pieces_.push_back(std::move(c));
        std::sort(pieces_.begin(), pieces_.end());
    }

    bool contains_word(const auto& symbol_at) const {
        for (const auto& c : pieces_) {
            bool ok = true;
            for (const auto& [coord, sym] : c.fixed)
                if (symbol_at(coord) != sym) {
                    ok = false;
                    break;
                }
            if (ok) return true;
        }
        return false;
    }

    std::string to_string() const {
        if (pieces_.empty()) return "{}";
        std::string s;
        for (const auto& c : pieces_) {
            s += s.empty() ? "{" : " u {";
            bool first = true;
            for (const auto& [coord, sym] : c.fixed) {
                s += (first ? "w" : ",w") + detail::coord_string(coord) + "=" + std::to_string(sym);
                first = false;
            }
            s += "}";
        }
        return s;
    }

    friend bool operator==(const CylinderSet&, const CylinderSet&) = default;

private:
    std::vector<cylinder_type> pieces_;
};

namespace detail {

/// Shared pieces of the Z-shift systems.
template <class Derived, class Coord>
class CylinderSystemBase {
public:
    using set_type = CylinderSet<Coord>;

    set_type whole() const { return set_type::whole(); }
    set_type empty_set() const { return set_type(); }

    set_type cylinder(std::vector<std::pair<Coord, int>> constraints) const {
        for (const auto& kv : constraints)
            if (kv.second < 0 || kv.second >= self().alphabet())
                throw argument_error("symbol " + std::to_string(kv.second) + " outside alphabet of size " +
                                     std::to_string(self().alphabet()));
        return set_type(Cylinder<Coord>::of(std::move(constraints)));
    }

    set_type intersect(const set_type& a, const set_type& b) const { return a & b; }
    set_type complement(const set_type& a) const { return a.complement(self().alphabet()); }
    bool is_empty(const set_type& a) const { return a.empty(); }

    /// Equality of sets, independent of how the pieces are cut.
    bool same_set(const set_type& a, const set_type& b) const {
        return (a & complement(b)).empty() && (b & complement(a)).empty();
    }

    Rational measure(const set_type& s) const {
        Rational total = 0;
        for (const auto& c : s.pieces()) total += self().cylinder_measure(c);
        return total;
    }

private:
    const Derived& self() const { return static_cast<const Derived&>(*this); }
};

}  // namespace detail

/// Sample point of a shift space: a lazily generated sequence seen from an offset.
template <class Coord, class Source>
struct ShiftPoint {
    std::shared_ptr<Source> source;
    Coord offset{};
};

/// i.i.d. shift with an exact probability vector.
class BernoulliShift : public detail::CylinderSystemBase<BernoulliShift, std::int64_t> {
public:
    using exponent_type = std::int64_t;

    struct Source {
        std::uint64_t seed;
        std::vector<double> cdf;
        int at(std::int64_t i) const { return detail::draw_symbol(detail::hash_coord(seed, i), cdf); }
    };
    using point_type = ShiftPoint<std::int64_t, Source>;

    explicit BernoulliShift(std::vector<Rational> probs) : probs_(std::move(probs)) {
        detail::validate_distribution(probs_, "Bernoulli shift");
        cdf_ = detail::cumulative(probs_);
    }

    int alphabet() const { return static_cast<int>(probs_.size()); }
    const std::vector<Rational>& probabilities() const { return probs_; }

    Rational cylinder_measure(const Cylinder<std::int64_t>& c) const {
        Rational m = 1;
        for (const auto& kv : c.fixed) m *= probs_[static_cast<std::size_t>(kv.second)];
        return m;
    }

    set_type preimage(const set_type& s, exponent_type k) const { return s.shifted(k); }

    template <class Rng> point_type sample(Rng& rng) const {
        return point_type{std::make_shared<Source>(Source{rng(), cdf_}), 0};
    }
    point_type apply(point_type x, exponent_type k) const {
        x.offset += k;
        return x;
    }
    bool contains(const set_type& s, const point_type& x) const {
        return s.contains_word([&](std::int64_t c) { return x.source->at(c + x.offset); });
    }

private:
    std::vector<Rational> probs_;
    std::vector<double> cdf_;
};

/// Stationary Markov shift with an exact stochastic matrix.
class MarkovShift : public detail::CylinderSystemBase<MarkovShift, std::int64_t> {
public:
    using exponent_type = std::int64_t;
    using Matrix = std::vector<std::vector<Rational>>;

    /// Path generated outward from coordinate 0: forward with P, backward with
    /// the time reversal P*_{ij} = pi_j P_{ji} / pi_i.
    class Source {
    public:
        Source(std::uint64_t seed, std::vector<double> start, std::vector<std::vector<double>> fwd,
               std::vector<std::vector<double>> bwd)
            : rng_(seed), fwd_(std::move(fwd)), bwd_(std::move(bwd)) {
            pos_.push_back(detail::draw_symbol(rng_(), start));
        }
        int at(std::int64_t i) {
            std::lock_guard<std::mutex> lock(mu_);
            if (i >= 0) {
                while (static_cast<std::int64_t>(pos_.size()) <= i)
                    pos_.push_back(detail::draw_symbol(rng_(), fwd_[static_cast<std::size_t>(pos_.back())]));
                return pos_[static_cast<std::size_t>(i)];
            }
            const auto j = static_cast<std::size_t>(-i - 1);
            while (neg_.size() <= j) {
                int prev = neg_.empty() ? pos_[0] : neg_.back();
                neg_.push_back(detail::draw_symbol(rng_(), bwd_[static_cast<std::size_t>(prev)]));
            }
            return neg_[j];
        }

    private:
        std::mutex mu_;
        std::mt19937_64 rng_;
        std::vector<std::vector<double>> fwd_, bwd_;
        std::vector<int> pos_, neg_;
    };
    using point_type = ShiftPoint<std::int64_t, Source>;

    explicit MarkovShift(Matrix P) : P_(std::move(P)), cache_(std::make_shared<PowerCache>()) {
        const std::size_t s = P_.size();
        if (s == 0) throw argument_error("Markov shift needs at least one state");
        for (const auto& row : P_) {
            if (row.size() != s) throw argument_error("transition matrix is not square");
            detail::validate_distribution(row, "transition matrix row");
        }
        pi_ = stationary(P_);
        for (std::size_t i = 0; i < s; ++i) {
            fwd_cdf_.push_back(detail::cumulative(P_[i]));
            std::vector<Rational> back(s, Rational(0));
            if (pi_[i] != 0)
                for (std::size_t j = 0; j < s; ++j) back[j] = pi_[j] * P_[j][i] / pi_[i];
            else
                back[i] = 1;
            bwd_cdf_.push_back(detail::cumulative(back));
        }
    }

    /// Unique stationary vector; throws when the chain has several (reducible).
    static std::vector<Rational> stationary(const Matrix& P) {
        const std::size_t s = P.size();
        // Solve pi (P - I) = 0 with sum(pi) = 1 by Gaussian elimination on the transpose.
        Matrix A(s + 1, std::vector<Rational>(s + 1, Rational(0)));
        for (std::size_t i = 0; i < s; ++i)
            for (std::size_t j = 0; j < s; ++j) A[i][j] = P[j][i] - (i == j ? 1 : 0);
        for (std::size_t j = 0; j < s; ++j) A[s][j] = 1;
        A[s][s] = 1;
        std::size_t rank = 0;
        std::vector<std::size_t> pivot_col;
        for (std::size_t col = 0; col < s && rank <= s; ++col) {
            std::size_t r = rank;
            while (r <= s && A[r][col] == 0) ++r;
            if (r > s) continue;
            std::swap(A[r], A[rank]);
            for (std::size_t i = 0; i <= s; ++i) {
                if (i == rank || A[i][col] == 0) continue;
                Rational f = A[i][col] / A[rank][col];
                for (std::size_t j = col; j <= s; ++j) A[i][j] -= f * A[rank][j];
            }
            pivot_col.push_back(col);
            ++rank;
        }
        if (rank < s) throw argument_error("Markov chain has more than one stationary distribution");
        std::vector<Rational> pi(s);
        for (std::size_t r = 0; r < s; ++r) pi[pivot_col[r]] = A[r][s] / A[r][pivot_col[r]];
        return pi;
    }

    int alphabet() const { return static_cast<int>(P_.size()); }
    const Matrix& transition() const { return P_; }
    const std::vector<Rational>& stationary_vector() const { return pi_; }

    /// P^g, memoized (binary powers plus recently used exponents).
    Matrix power(std::int64_t g) const {
        if (g < 0) throw argument_error("negative matrix power");
        std::lock_guard<std::mutex> lock(cache_->mu);
        if (auto it = cache_->exact.find(g); it != cache_->exact.end()) return it->second;
        Matrix result = identity(P_.size());
        if (cache_->binary.empty()) cache_->binary.push_back(P_);
        std::size_t bit = 0;
        for (std::int64_t e = g; e > 0; e >>= 1, ++bit) {
            while (cache_->binary.size() <= bit) cache_->binary.push_back(mul(cache_->binary.back(), cache_->binary.back()));
            if (e & 1) result = mul(result, cache_->binary[bit]);
        }
        if (cache_->exact.size() > 4096) cache_->exact.clear();
        cache_->exact.emplace(g, result);
        return result;
    }

    Rational cylinder_measure(const Cylinder<std::int64_t>& c) const {
        if (c.fixed.empty()) return 1;
        Rational m = pi_[static_cast<std::size_t>(c.fixed[0].second)];
        for (std::size_t i = 1; i < c.fixed.size() && m != 0; ++i) {
            const auto gap = c.fixed[i].first - c.fixed[i - 1].first;
            m *= gap == 1 ? P_[static_cast<std::size_t>(c.fixed[i - 1].second)][static_cast<std::size_t>(c.fixed[i].second)]
                          : power(gap)[static_cast<std::size_t>(c.fixed[i - 1].second)][static_cast<std::size_t>(c.fixed[i].second)];
        }
        return m;
    }

    set_type preimage(const set_type& s, exponent_type k) const { return s.shifted(k); }

    template <class Rng> point_type sample(Rng& rng) const {
        return point_type{std::make_shared<Source>(rng(), detail::cumulative(pi_), fwd_cdf_, bwd_cdf_), 0};
    }
    point_type apply(point_type x, exponent_type k) const {
        x.offset += k;
        return x;
    }
    bool contains(const set_type& s, const point_type& x) const {
        return s.contains_word([&](std::int64_t c) { return x.source->at(c + x.offset); });
    }

    static Matrix identity(std::size_t s) {
        Matrix I(s, std::vector<Rational>(s, Rational(0)));
        for (std::size_t i = 0; i < s; ++i) I[i][i] = 1;
        return I;
    }
    static Matrix mul(const Matrix& a, const Matrix& b) {
        const std::size_t s = a.size();
        Matrix c(s, std::vector<Rational>(s, Rational(0)));
        for (std::size_t i = 0; i < s; ++i)
            for (std::size_t k = 0; k < s; ++k) {
                if (a[i][k] == 0) continue;
                for (std::size_t j = 0; j < s; ++j) c[i][j] += a[i][k] * b[k][j];
            }
        return c;
    }

private:
    struct PowerCache {
        std::mutex mu;
        std::vector<Matrix> binary;
        std::map<std::int64_t, Matrix> exact;
    };

    Matrix P_;
    std::vector<Rational> pi_;
    std::vector<std::vector<double>> fwd_cdf_, bwd_cdf_;
    std::shared_ptr<PowerCache> cache_;
};

/// Product-Bernoulli measure on A^{Z^d}; Z^d acts by (z w)_v = w_{v+z}.
class BernoulliLattice : public detail::CylinderSystemBase<BernoulliLattice, Site> {
public:
    using exponent_type = Site;

    struct Source {
        std::uint64_t seed;
        std::vector<double> cdf;
        int at(const Site& v) const { return detail::draw_symbol(detail::hash_coord(seed, v), cdf); }
    };
    using point_type = ShiftPoint<Site, Source>;

    BernoulliLattice(std::vector<Rational> probs, int d) : probs_(std::move(probs)), d_(d) {
        detail::validate_distribution(probs_, "Bernoulli lattice");
        if (d < 1 || d > kMaxLatticeDim) throw argument_error("lattice dimension must be in 1..4");
        cdf_ = detail::cumulative(probs_);
    }

    int alphabet() const { return static_cast<int>(probs_.size()); }
    int dimension() const { return d_; }

    Rational cylinder_measure(const Cylinder<Site>& c) const {
        Rational m = 1;
        for (const auto& kv : c.fixed) m *= probs_[static_cast<std::size_t>(kv.second)];
        return m;
    }

    set_type preimage(const set_type& s, const exponent_type& z) const {
        check(z);
        return s.shifted(z);
    }

    /// Single-site cylinders {w_e = s} over unit vectors e generate the
    /// translates needed by the commutation check.
    std::vector<set_type> generating_sets() const {
        std::vector<set_type> out;
        for (int i = 0; i < d_; ++i) {
            Site e{};
            e[static_cast<std::size_t>(i)] = 1;
            for (int s = 0; s < alphabet(); ++s) out.push_back(cylinder({{e, s}}));
        }
        out.push_back(cylinder({{Site{}, 0}}));
        return out;
    }

    template <class Rng> point_type sample(Rng& rng) const {
        return point_type{std::make_shared<Source>(Source{rng(), cdf_}), Site{}};
    }
    point_type apply(point_type x, const exponent_type& z) const {
        x.offset = x.offset + z;
        return x;
    }
    bool contains(const set_type& s, const point_type& x) const {
        return s.contains_word([&](const Site& v) { return x.source->at(v + x.offset); });
    }

private:
    void check(const Site& z) const {
        for (int i = d_; i < kMaxLatticeDim; ++i)
            if (z[static_cast<std::size_t>(i)] != 0) throw argument_error("vector has more components than the lattice dimension");
    }

    std::vector<Rational> probs_;
    std::vector<double> cdf_;
    int d_;
};

}  // namespace ergo
