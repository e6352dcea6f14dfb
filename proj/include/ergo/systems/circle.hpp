#pragma once

// Rotation of [0,1) by a rational angle. Sets are finite unions of half-open
// arcs with rational endpoints, kept sorted, disjoint and merged so that equal
// sets have equal representations.

#include "ergo/core.hpp"

#include <algorithm>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace ergo {

class ArcSet {
public:
    using Arc = std::pair<Rational, Rational>;  // [first, second), 0 <= first < second <= 1

    ArcSet() = default;

    /// [a,b) on the circle; a > b wraps through 0. a == b is the empty arc.
    static ArcSet arc(const Rational& a, const Rational& b) {
        if (a < 0 || a > 1 || b < 0 || b > 1) throw argument_error("arc endpoints must lie in [0,1]");
        ArcSet s;
        if (a < b) {
            s.arcs_.emplace_back(a, b);
        } else if (a > b) {
            if (b > 0) s.arcs_.emplace_back(Rational(0), b);
            if (a < 1) s.arcs_.emplace_back(a, Rational(1));
        }
        s.normalize();
        return s;
    }

    static ArcSet full() { return arc(Rational(0), Rational(1)); }

    static ArcSet from_arcs(std::vector<Arc> arcs) {
        ArcSet s;
        for (auto& [a, b] : arcs) {
            ArcSet piece = arc(a, b);
            s.arcs_.insert(s.arcs_.end(), piece.arcs_.begin(), piece.arcs_.end());
        }
        s.normalize();
        return s;
    }

    const std::vector<Arc>& arcs() const { return arcs_; }
    bool empty() const { return arcs_.empty(); }

    Rational length() const {
        Rational t = 0;
        for (const auto& [a, b] : arcs_) t += b - a;
        return t;
    }

    bool contains(const Rational& x) const {
        for (const auto& [a, b] : arcs_)
            if (a <= x && x < b) return true;
        return false;
    }
    bool contains(double x) const {
        for (const auto& [a, b] : arcs_)
            if (a.get_d() <= x && x < b.get_d()) return true;
        return false;
    }

    /// The set translated by t (mod 1).
    ArcSet translated(const Rational& t) const {
        Rational s = t - floor_q(t);
        ArcSet out;
        for (const auto& [a, b] : arcs_) {
            Rational lo = a + s, hi = b + s;
            if (hi <= 1) {
                out.arcs_.emplace_back(lo, hi);
            } else if (lo >= 1) {
                out.arcs_.emplace_back(lo - 1, hi - 1);
            } else {
                out.arcs_.emplace_back(lo, Rational(1));
                out.arcs_.emplace_back(Rational(0), hi - 1);
            }
        }
        out.normalize();
        return out;
    }

    friend ArcSet operator&(const ArcSet& x, const ArcSet& y) {
        ArcSet out;
        std::size_t i = 0, j = 0;
        while (i < x.arcs_.size() && j < y.arcs_.size()) {
            const auto& [a1, b1] = x.arcs_[i];
            const auto& [a2, b2] = y.arcs_[j];
            const Rational& lo = std::max(a1, a2);
            const Rational& hi = std::min(b1, b2);
            if (lo < hi) out.arcs_.emplace_back(lo, hi);
            if (b1 < b2) ++i;
            else ++j;
        }
        return out;
    }

    ArcSet operator~() const {
        ArcSet out;
        Rational cur = 0;
        for (const auto& [a, b] : arcs_) {
            if (cur < a) out.arcs_.emplace_back(cur, a);
            cur = b;
        }
        if (cur < 1) out.arcs_.emplace_back(cur, Rational(1));
        return out;
    }

    friend bool operator==(const ArcSet& x, const ArcSet& y) { return x.arcs_ == y.arcs_; }

    std::string to_string() const {
        if (arcs_.empty()) return "{}";
        std::string s;
        for (const auto& [a, b] : arcs_) s += (s.empty() ? "" : " u ") + ("[" + a.get_str() + "," + b.get_str() + ")");
        return s;
    }

    static Rational floor_q(const Rational& q) {
        BigInt f;
        mpz_fdiv_q(f.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
        return Rational(f);
    }

private:
    void normalize() {
        std::sort(arcs_.begin(), arcs_.end());
        std::vector<Arc> merged;
        for (auto& arc : arcs_) {
            if (arc.first >= arc.second) continue;
            if (!merged.empty() && arc.first <= merged.back().second) {
                if (arc.second > merged.back().second) merged.back().second = arc.second;
            } else {
                merged.push_back(std::move(arc));
            }
        }
        arcs_ = std::move(merged);
    }

    std::vector<Arc> arcs_;
};

/// T x = x + angle (mod 1), Lebesgue measure.
class CircleRotation {
public:
    using set_type = ArcSet;
    using exponent_type = std::int64_t;
    using point_type = Rational;

    explicit CircleRotation(Rational angle) : angle_(std::move(angle)) {
        angle_.canonicalize();
        angle_ -= ArcSet::floor_q(angle_);
    }

    const Rational& angle() const { return angle_; }

    set_type whole() const { return ArcSet::full(); }
    set_type empty_set() const { return ArcSet(); }
    set_type arc(const Rational& a, const Rational& b) const { return ArcSet::arc(a, b); }

    Rational measure(const set_type& s) const { return s.length(); }

    /// T^{-k}S = S - k*angle.
    set_type preimage(const set_type& s, exponent_type k) const { return s.translated(-Rational(k) * angle_); }

    set_type intersect(const set_type& a, const set_type& b) const { return a & b; }
    set_type complement(const set_type& a) const { return ~a; }
    bool is_empty(const set_type& a) const { return a.empty(); }
    bool same_set(const set_type& a, const set_type& b) const { return a == b; }

    /// Uniform sample on a 2^-53 grid, kept exact so boundary tests are consistent.
    template <class Rng> point_type sample(Rng& rng) const {
        std::uint64_t bits = rng() >> 11;
        Rational x{BigInt(static_cast<unsigned long>(bits)), BigInt(BigInt(1) << 53)};
        x.canonicalize();
        return x;
    }
    point_type apply(const point_type& x, exponent_type k) const {
        Rational y = x + Rational(k) * angle_;
        return y - ArcSet::floor_q(y);
    }
    bool contains(const set_type& s, const point_type& x) const { return s.contains(x); }

private:
    Rational angle_;
};

}  // namespace ergo
