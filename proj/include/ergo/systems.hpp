#pragma once

// Umbrella header for the system zoo.

#include "ergo/systems/circle.hpp"
#include "ergo/systems/cylinder.hpp"
#include "ergo/systems/finite.hpp"
#include "ergo/systems/lattice.hpp"
#include "ergo/systems/product.hpp"
#include "ergo/systems/sampled.hpp"

#include <concepts>

namespace ergo {

/// EXACT tier: rational measure queries on a set algebra closed under
/// preimage, intersection and complement.
template <class S>
concept ExactSystem = requires(const S& sys, const typename S::set_type& a, typename S::exponent_type k) {
    { sys.whole() } -> std::convertible_to<typename S::set_type>;
    { sys.measure(a) } -> std::convertible_to<Rational>;
    { sys.preimage(a, k) } -> std::convertible_to<typename S::set_type>;
    { sys.intersect(a, a) } -> std::convertible_to<typename S::set_type>;
    { sys.is_empty(a) } -> std::convertible_to<bool>;
};

/// Orbit evaluation plus an invariant-measure sampler.
template <class S>
concept SampledSystem = requires(const S& sys, const typename S::point_type& x, std::mt19937_64& rng) {
    { sys.apply(x, std::int64_t{1}) };
    { sys.sample(rng) } -> std::convertible_to<typename S::point_type>;
};

/// The forward orbit point T^k x; k < 0 requires an invertible system.
template <class S>
typename S::point_type orbit_eval(const S& sys, const typename S::point_type& x, std::int64_t k) {
    return sys.apply(x, k);
}

}  // namespace ergo
