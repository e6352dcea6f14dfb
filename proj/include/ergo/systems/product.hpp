#pragma once

// Direct product of two exact Z-systems, T = T1 x T2, with the product measure.
// Sets are disjoint unions of rectangles A x B.

#include "ergo/core.hpp"

#include <memory>
#include <utility>
#include <vector>

namespace ergo {

template <class S1, class S2>
class Product {
public:
    struct Rect {
        typename S1::set_type first;
        typename S2::set_type second;
    };
    struct set_type {
        std::vector<Rect> rects;
    };
    using exponent_type = std::int64_t;
    using point_type = std::pair<typename S1::point_type, typename S2::point_type>;

    Product(S1 a, S2 b) : a_(std::move(a)), b_(std::move(b)) {}

    const S1& first() const { return a_; }
    const S2& second() const { return b_; }

    set_type whole() const { return rect(a_.whole(), b_.whole()); }
    set_type empty_set() const { return {}; }
    set_type rect(typename S1::set_type x, typename S2::set_type y) const {
        set_type s;
        if (!a_.is_empty(x) && !b_.is_empty(y)) s.rects.push_back({std::move(x), std::move(y)});
        return s;
    }

    Rational measure(const set_type& s) const {
        Rational t = 0;
        for (const auto& r : s.rects) t += a_.measure(r.first) * b_.measure(r.second);
        return t;
    }

    set_type preimage(const set_type& s, exponent_type k) const {
        set_type out;
        for (const auto& r : s.rects) out.rects.push_back({a_.preimage(r.first, k), b_.preimage(r.second, k)});
        return out;
    }

    set_type intersect(const set_type& x, const set_type& y) const {
        set_type out;
        for (const auto& r : x.rects)
            for (const auto& q : y.rects) {
                auto f = a_.intersect(r.first, q.first);
                if (a_.is_empty(f)) continue;
                auto g = b_.intersect(r.second, q.second);
                if (b_.is_empty(g)) continue;
                out.rects.push_back({std::move(f), std::move(g)});
            }
        return out;
    }

    /// (A x B)^c = (A^c x X2) u (A x B^c), intersected over the rectangles.
    set_type complement(const set_type& s) const {
        set_type out = whole();
        for (const auto& r : s.rects) {
            set_type c = rect(a_.complement(r.first), b_.whole());
            for (auto& extra : rect(r.first, b_.complement(r.second)).rects) c.rects.push_back(std::move(extra));
            out = intersect(out, c);
        }
        return out;
    }

    bool is_empty(const set_type& s) const { return s.rects.empty(); }
    bool same_set(const set_type& x, const set_type& y) const {
        return is_empty(intersect(x, complement(y))) && is_empty(intersect(y, complement(x)));
    }

    template <class Rng> point_type sample(Rng& rng) const {
        auto p = a_.sample(rng);
        return {std::move(p), b_.sample(rng)};
    }
    point_type apply(const point_type& p, exponent_type k) const { return {a_.apply(p.first, k), b_.apply(p.second, k)}; }
    bool contains(const set_type& s, const point_type& p) const {
        for (const auto& r : s.rects)
            if (a_.contains(r.first, p.first) && b_.contains(r.second, p.second)) return true;
        return false;
    }

private:
    S1 a_;
    S2 b_;
};

}  // namespace ergo
