#pragma once

// Finite systems with uniform measure: a cyclic rotation, an arbitrary
// permutation ("relabeled" kind), and commuting permutation actions of Z^d.

#include "ergo/core.hpp"

#include <bit>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <vector>

namespace ergo {

/// Subset of {0, ..., m-1} as a packed bitset. Equal sets compare equal.
class FiniteSet {
public:
    FiniteSet() = default;
    explicit FiniteSet(std::size_t m) : m_(m), words_((m + 63) / 64, 0) {}

    static FiniteSet of(std::size_t m, const std::vector<std::int64_t>& points) {
        FiniteSet s(m);
        for (auto p : points) {
            if (p < 0 || static_cast<std::size_t>(p) >= m)
                throw argument_error("point " + std::to_string(p) + " outside {0,...," + std::to_string(m - 1) + "}");
            s.insert(static_cast<std::size_t>(p));
        }
        return s;
    }

    static FiniteSet full(std::size_t m) {
        FiniteSet s(m);
        for (std::size_t i = 0; i < m; ++i) s.insert(i);
        return s;
    }

    std::size_t universe() const { return m_; }
    bool contains(std::size_t i) const { return i < m_ && ((words_[i / 64] >> (i % 64)) & 1u); }
    void insert(std::size_t i) { words_[i / 64] |= std::uint64_t{1} << (i % 64); }

    std::size_t count() const {
        std::size_t c = 0;
        for (auto w : words_) c += static_cast<std::size_t>(std::popcount(w));
        return c;
    }
    bool empty() const {
        for (auto w : words_)
            if (w) return false;
        return true;
    }

    std::vector<std::int64_t> members() const {
        std::vector<std::int64_t> out;
        for (std::size_t i = 0; i < m_; ++i)
            if (contains(i)) out.push_back(static_cast<std::int64_t>(i));
        return out;
    }

    friend FiniteSet operator&(const FiniteSet& a, const FiniteSet& b) {
        a.require_same(b);
        FiniteSet out = a;
        for (std::size_t i = 0; i < out.words_.size(); ++i) out.words_[i] &= b.words_[i];
        return out;
    }

    FiniteSet operator~() const {
        FiniteSet out = *this;
        for (auto& w : out.words_) w = ~w;
        out.trim();
        return out;
    }

    friend bool operator==(const FiniteSet&, const FiniteSet&) = default;

private:
    void trim() {
        if (m_ % 64 && !words_.empty()) words_.back() &= (std::uint64_t{1} << (m_ % 64)) - 1;
    }
    void require_same(const FiniteSet& o) const {
        if (m_ != o.m_) throw argument_error("finite sets over different universes");
    }

    std::size_t m_ = 0;
    std::vector<std::uint64_t> words_;
};

/// x -> x + step (mod m) on Z_m with uniform measure.
class CyclicRotation {
public:
    using set_type = FiniteSet;
    using exponent_type = std::int64_t;
    using point_type = std::int64_t;

    explicit CyclicRotation(std::int64_t m, std::int64_t step = 1) : m_(m), step_(step) {
        if (m < 1) throw argument_error("cyclic rotation needs modulus >= 1");
        step_ = ((step % m) + m) % m;
    }

    std::int64_t modulus() const { return m_; }
    std::int64_t step() const { return step_; }

    set_type whole() const { return FiniteSet::full(static_cast<std::size_t>(m_)); }
    set_type empty_set() const { return FiniteSet(static_cast<std::size_t>(m_)); }
    set_type points(const std::vector<std::int64_t>& pts) const { return FiniteSet::of(static_cast<std::size_t>(m_), pts); }

    Rational measure(const set_type& s) const {
        check(s);
        return make_rational(static_cast<long>(s.count()), static_cast<long>(m_));
    }

    /// T^{-k}S = {x : x + k*step in S} = S - k*step.
    set_type preimage(const set_type& s, exponent_type k) const {
        check(s);
        const std::int64_t shift = mod(-static_cast<__int128>(k) * step_);
        set_type out = empty_set();
        for (std::int64_t x = 0; x < m_; ++x)
            if (s.contains(static_cast<std::size_t>(x))) out.insert(static_cast<std::size_t>(mod(static_cast<__int128>(x) + shift)));
        return out;
    }

    set_type intersect(const set_type& a, const set_type& b) const { return a & b; }
    set_type complement(const set_type& a) const { return ~a; }
    bool is_empty(const set_type& a) const { return a.empty(); }
    bool same_set(const set_type& a, const set_type& b) const { return a == b; }

    // Sampled view.
    template <class Rng> point_type sample(Rng& rng) const {
        return std::uniform_int_distribution<std::int64_t>(0, m_ - 1)(rng);
    }
    point_type apply(point_type x, exponent_type k) const { return mod(static_cast<__int128>(x) + static_cast<__int128>(k) * step_); }
    bool contains(const set_type& s, point_type x) const { return s.contains(static_cast<std::size_t>(x)); }

private:
    std::int64_t mod(__int128 v) const {
        __int128 r = v % m_;
        if (r < 0) r += m_;
        return static_cast<std::int64_t>(r);
    }
    void check(const set_type& s) const {
        if (s.universe() != static_cast<std::size_t>(m_)) throw argument_error("set is not a subset of Z_" + std::to_string(m_));
    }

    std::int64_t m_;
    std::int64_t step_;
};

namespace detail {

/// Cycle decomposition for fast T^k x with arbitrary integer k.
class CycleTable {
public:
    CycleTable() = default;
    explicit CycleTable(const std::vector<std::int64_t>& perm) : cycle_of_(perm.size()), pos_(perm.size()) {
        const std::size_t m = perm.size();
        std::vector<bool> seen(m, false);
        for (std::size_t i = 0; i < m; ++i) {
            if (perm[i] < 0 || static_cast<std::size_t>(perm[i]) >= m) throw argument_error("permutation entry out of range");
            if (seen[static_cast<std::size_t>(perm[i])]) throw argument_error("map is not a permutation");
            seen[static_cast<std::size_t>(perm[i])] = true;
        }
        std::fill(seen.begin(), seen.end(), false);
        for (std::size_t i = 0; i < m; ++i) {
            if (seen[i]) continue;
            std::vector<std::int64_t> cyc;
            for (std::size_t x = i; !seen[x]; x = static_cast<std::size_t>(perm[x])) {
                seen[x] = true;
                cycle_of_[x] = cycles_.size();
                pos_[x] = cyc.size();
                cyc.push_back(static_cast<std::int64_t>(x));
            }
            cycles_.push_back(std::move(cyc));
        }
    }

    std::int64_t power_apply(std::int64_t x, std::int64_t k) const {
        const auto& cyc = cycles_[cycle_of_[static_cast<std::size_t>(x)]];
        const auto len = static_cast<std::int64_t>(cyc.size());
        std::int64_t p = (static_cast<std::int64_t>(pos_[static_cast<std::size_t>(x)]) + k % len) % len;
        if (p < 0) p += len;
        return cyc[static_cast<std::size_t>(p)];
    }

private:
    std::vector<std::vector<std::int64_t>> cycles_;
    std::vector<std::size_t> cycle_of_;
    std::vector<std::size_t> pos_;
};

}  // namespace detail

/// T x = perm[x] on {0,...,m-1} with uniform measure; any permutation preserves it.
class FinitePermutationSystem {
public:
    using set_type = FiniteSet;
    using exponent_type = std::int64_t;
    using point_type = std::int64_t;

    explicit FinitePermutationSystem(std::vector<std::int64_t> perm) : perm_(std::move(perm)), table_(perm_) {
        if (perm_.empty()) throw argument_error("permutation system needs at least one point");
    }

    /// Rotation by `step` on Z_m conjugated by the relabeling x -> relabel[x].
    static FinitePermutationSystem relabeled_rotation(std::int64_t m, std::int64_t step, const std::vector<std::int64_t>& relabel) {
        if (static_cast<std::int64_t>(relabel.size()) != m) throw argument_error("relabeling must list every point once");
        detail::CycleTable check(relabel);
        std::vector<std::int64_t> inv(static_cast<std::size_t>(m));
        for (std::int64_t i = 0; i < m; ++i) inv[static_cast<std::size_t>(relabel[static_cast<std::size_t>(i)])] = i;
        std::vector<std::int64_t> perm(static_cast<std::size_t>(m));
        for (std::int64_t y = 0; y < m; ++y) {
            std::int64_t x = inv[static_cast<std::size_t>(y)];
            perm[static_cast<std::size_t>(y)] = relabel[static_cast<std::size_t>((((x + step) % m) + m) % m)];
        }
        return FinitePermutationSystem(std::move(perm));
    }

    std::size_t size() const { return perm_.size(); }
    const std::vector<std::int64_t>& permutation() const { return perm_; }

    set_type whole() const { return FiniteSet::full(size()); }
    set_type empty_set() const { return FiniteSet(size()); }
    set_type points(const std::vector<std::int64_t>& pts) const { return FiniteSet::of(size(), pts); }

    Rational measure(const set_type& s) const {
        check(s);
        return make_rational(static_cast<long>(s.count()), static_cast<long>(size()));
    }

    set_type preimage(const set_type& s, exponent_type k) const {
        check(s);
        set_type out = empty_set();
        for (std::size_t x = 0; x < size(); ++x)
            if (s.contains(static_cast<std::size_t>(table_.power_apply(static_cast<std::int64_t>(x), k)))) out.insert(x);
        return out;
    }

    set_type intersect(const set_type& a, const set_type& b) const { return a & b; }
    set_type complement(const set_type& a) const { return ~a; }
    bool is_empty(const set_type& a) const { return a.empty(); }
    bool same_set(const set_type& a, const set_type& b) const { return a == b; }

    template <class Rng> point_type sample(Rng& rng) const {
        return std::uniform_int_distribution<std::int64_t>(0, static_cast<std::int64_t>(size()) - 1)(rng);
    }
    point_type apply(point_type x, exponent_type k) const { return table_.power_apply(x, k); }
    bool contains(const set_type& s, point_type x) const { return s.contains(static_cast<std::size_t>(x)); }

private:
    void check(const set_type& s) const {
        if (s.universe() != size()) throw argument_error("set universe does not match the permutation system");
    }

    std::vector<std::int64_t> perm_;
    detail::CycleTable table_;
};

/// Z^d acting on a finite set through d commuting permutations:
/// T^z = g_1^{z_1} ... g_d^{z_d}. Uniform measure.
class PermutationAction {
public:
    using set_type = FiniteSet;
    using exponent_type = Site;
    using point_type = std::int64_t;

    explicit PermutationAction(std::vector<std::vector<std::int64_t>> generators) : gens_(std::move(generators)) {
        if (gens_.empty() || static_cast<int>(gens_.size()) > kMaxLatticeDim)
            throw argument_error("permutation action needs 1.." + std::to_string(kMaxLatticeDim) + " generators");
        m_ = gens_[0].size();
        for (const auto& g : gens_) {
            if (g.size() != m_) throw argument_error("generators act on sets of different sizes");
            tables_.emplace_back(g);
        }
        for (std::size_t i = 0; i < gens_.size(); ++i)
            for (std::size_t j = i + 1; j < gens_.size(); ++j)
                for (std::size_t x = 0; x < m_; ++x)
                    if (gens_[i][static_cast<std::size_t>(gens_[j][x])] != gens_[j][static_cast<std::size_t>(gens_[i][x])])
                        throw argument_error("generators " + std::to_string(i + 1) + " and " + std::to_string(j + 1) +
                                             " do not commute (point " + std::to_string(x) + ")");
    }

    /// (Z_m)^d with coordinate rotations; points are row-major indices.
    static PermutationAction torus(std::int64_t m, int d) {
        if (m < 1 || d < 1 || d > kMaxLatticeDim) throw argument_error("torus needs m >= 1 and 1 <= d <= 4");
        std::int64_t total = 1;
        for (int i = 0; i < d; ++i) total *= m;
        std::vector<std::vector<std::int64_t>> gens;
        std::int64_t stride = 1;
        for (int axis = d - 1; axis >= 0; --axis) {
            std::vector<std::int64_t> g(static_cast<std::size_t>(total));
            for (std::int64_t x = 0; x < total; ++x) {
                std::int64_t c = (x / stride) % m;
                g[static_cast<std::size_t>(x)] = x + (((c + 1) % m) - c) * stride;
            }
            gens.insert(gens.begin(), std::move(g));
            stride *= m;
        }
        return PermutationAction(std::move(gens));
    }

    int dimension() const { return static_cast<int>(gens_.size()); }
    std::size_t size() const { return m_; }

    set_type whole() const { return FiniteSet::full(m_); }
    set_type empty_set() const { return FiniteSet(m_); }
    set_type points(const std::vector<std::int64_t>& pts) const { return FiniteSet::of(m_, pts); }

    Rational measure(const set_type& s) const { return make_rational(static_cast<long>(s.count()), static_cast<long>(m_)); }

    point_type apply(point_type x, const exponent_type& z) const {
        for (int i = 0; i < dimension(); ++i) x = tables_[static_cast<std::size_t>(i)].power_apply(x, z[static_cast<std::size_t>(i)]);
        return x;
    }

    set_type preimage(const set_type& s, const exponent_type& z) const {
        set_type out = empty_set();
        for (std::size_t x = 0; x < m_; ++x)
            if (s.contains(static_cast<std::size_t>(apply(static_cast<point_type>(x), z)))) out.insert(x);
        return out;
    }

    set_type intersect(const set_type& a, const set_type& b) const { return a & b; }
    set_type complement(const set_type& a) const { return ~a; }
    bool is_empty(const set_type& a) const { return a.empty(); }
    bool same_set(const set_type& a, const set_type& b) const { return a == b; }

    /// Singletons generate the algebra.
    std::vector<set_type> generating_sets() const {
        std::vector<set_type> out;
        for (std::size_t x = 0; x < m_; ++x) out.push_back(FiniteSet::of(m_, {static_cast<std::int64_t>(x)}));
        return out;
    }

    template <class Rng> point_type sample(Rng& rng) const {
        return std::uniform_int_distribution<std::int64_t>(0, static_cast<std::int64_t>(m_) - 1)(rng);
    }
    bool contains(const set_type& s, point_type x) const { return s.contains(static_cast<std::size_t>(x)); }

private:
    std::vector<std::vector<std::int64_t>> gens_;
    std::vector<detail::CycleTable> tables_;
    std::size_t m_ = 0;
};

}  // namespace ergo
