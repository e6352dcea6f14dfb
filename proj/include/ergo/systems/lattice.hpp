#pragma once

// Commuting families T_j, That_j inside a Z^d action: T_j acts as the vector
// z_j and That_j as zhat_j, so T_j^n That_j^N is the vector n z_j + N zhat_j.

#include "ergo/core.hpp"

#include <string>
#include <utility>
#include <vector>

namespace ergo {

template <class Base>
class LatticeAction {
public:
    using base_type = Base;
    using set_type = typename Base::set_type;
    using exponent_type = Site;

    /// z_j must be distinct and nonzero; zhat_j are unconstrained.
    LatticeAction(Base base, std::vector<Site> z, std::vector<Site> zhat)
        : base_(std::move(base)), z_(std::move(z)), zhat_(std::move(zhat)) {
        if (z_.empty()) throw argument_error("lattice action needs at least one generator");
        if (zhat_.empty()) zhat_.assign(z_.size(), Site{});
        if (zhat_.size() != z_.size()) throw argument_error("z and zhat lists differ in length");
        for (std::size_t i = 0; i < z_.size(); ++i) {
            if (is_zero(z_[i])) throw argument_error("z_" + std::to_string(i + 1) + " is the zero vector");
            for (std::size_t j = 0; j < i; ++j)
                if (z_[i] == z_[j])
                    throw argument_error("z_" + std::to_string(j + 1) + " and z_" + std::to_string(i + 1) + " coincide");
        }
        if (!commutes()) throw argument_error("lattice generators do not commute");
    }

    const Base& base() const { return base_; }
    std::size_t size() const { return z_.size(); }
    const std::vector<Site>& z() const { return z_; }
    const std::vector<Site>& zhat() const { return zhat_; }

    /// Exponent of T_j^n That_j^N (j is 0-based).
    Site exponent(std::size_t j, std::int64_t n, std::int64_t N) const { return n * z_[j] + N * zhat_[j]; }

    /// Checks T_i T_j = T_j T_i (and likewise with the hats) on a generating family.
    bool commutes() const {
        std::vector<Site> all = z_;
        all.insert(all.end(), zhat_.begin(), zhat_.end());
        for (const auto& s : base_.generating_sets())
            for (std::size_t i = 0; i < all.size(); ++i)
                for (std::size_t j = i + 1; j < all.size(); ++j) {
                    auto ij = base_.preimage(base_.preimage(s, all[i]), all[j]);
                    auto ji = base_.preimage(base_.preimage(s, all[j]), all[i]);
                    if (!base_.same_set(ij, ji)) return false;
                }
        return true;
    }

    set_type whole() const { return base_.whole(); }
    Rational measure(const set_type& s) const { return base_.measure(s); }
    set_type preimage(const set_type& s, const Site& v) const { return base_.preimage(s, v); }
    set_type intersect(const set_type& a, const set_type& b) const { return base_.intersect(a, b); }
    set_type complement(const set_type& a) const { return base_.complement(a); }
    bool is_empty(const set_type& a) const { return base_.is_empty(a); }
    bool same_set(const set_type& a, const set_type& b) const { return base_.same_set(a, b); }

private:
    Base base_;
    std::vector<Site> z_;
    std::vector<Site> zhat_;
};

inline Site site(std::int64_t a, std::int64_t b = 0, std::int64_t c = 0, std::int64_t d = 0) { return Site{a, b, c, d}; }

}  // namespace ergo
