#pragma once

// SAMPLED-tier systems: orbit evaluation plus a sampler for the invariant
// measure. No exact set algebra. Samplers are deterministic given the RNG.

#include "ergo/core.hpp"

#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <utility>

namespace ergo {

/// x -> x + alpha (mod 1) in fixed point with `bits` fractional bits.
class IrrationalRotation {
public:
    using point_type = BigInt;  // x = point / 2^bits
    static constexpr bool invertible = true;
    bool is_invertible() const { return invertible; }

    IrrationalRotation(BigInt alpha_fixed, unsigned bits = 128) : bits_(bits), one_(BigInt(1) << bits) {
        if (bits < 8 || bits > 4096) throw argument_error("rotation precision must be 8..4096 bits");
        alpha_ = wrap(alpha_fixed);
    }

    /// alpha = sqrt(a) - b, truncated to the precision.
    static IrrationalRotation sqrt_minus(unsigned long a, long b, unsigned bits = 128) {
        BigInt scaled = BigInt(a) << (2 * bits);
        BigInt root;
        mpz_sqrt(root.get_mpz_t(), scaled.get_mpz_t());
        return IrrationalRotation(root - (BigInt(b) << bits), bits);
    }

    static IrrationalRotation from_double(double alpha, unsigned bits = 128) {
        BigInt v = static_cast<long>(std::ldexp(alpha - std::floor(alpha), 52));
        return IrrationalRotation(BigInt(v << (bits - 52)), bits);
    }

    unsigned bits() const { return bits_; }
    const BigInt& alpha_fixed() const { return alpha_; }
    double alpha() const { return to_double(alpha_); }

    point_type point(double x) const {
        BigInt v = static_cast<long>(std::ldexp(x - std::floor(x), 52));
        return wrap(BigInt(v << (bits_ - 52)));
    }

    point_type apply(const point_type& x, std::int64_t k) const { return wrap(BigInt(x + BigInt(static_cast<long>(k)) * alpha_)); }

    double to_double(const point_type& x) const {
        // Top 53 bits suffice for a double.
        if (bits_ <= 53) return std::ldexp(x.get_d(), -static_cast<int>(bits_));
        BigInt top = x >> (bits_ - 53);
        return std::ldexp(top.get_d(), -53);
    }

    /// Exact fraction x/2^bits.
    Rational to_rational(const point_type& x) const {
        Rational q{x, one_};
        q.canonicalize();
        return q;
    }

    template <class Rng> point_type sample(Rng& rng) const {
        BigInt v = 0;
        for (unsigned got = 0; got < bits_; got += 64) v = (v << 64) + BigInt(static_cast<unsigned long>(rng()));
        return wrap(v);
    }

private:
    BigInt wrap(const BigInt& v) const {
        BigInt r;
        mpz_fdiv_r(r.get_mpz_t(), v.get_mpz_t(), one_.get_mpz_t());
        return r;
    }

    unsigned bits_;
    BigInt one_;
    BigInt alpha_;
};

/// x -> 1/x mod 1 with the Gauss measure dx / ((1+x) ln 2). Forward only.
class GaussMap {
public:
    using point_type = double;
    static constexpr bool invertible = false;
    bool is_invertible() const { return invertible; }

    static double step(double x) {
        if (x <= 0) return 0;
        double y = 1.0 / x;
        return y - std::floor(y);
    }
    static Rational step(const Rational& x) {
        if (x <= 0) return 0;
        Rational y = 1 / x;
        BigInt f;
        mpz_fdiv_q(f.get_mpz_t(), y.get_num_mpz_t(), y.get_den_mpz_t());
        return y - f;
    }

    template <class X> X apply(X x, std::int64_t k) const {
        if (k < 0) throw argument_error("the Gauss map is not invertible; exponent " + std::to_string(k) + " < 0");
        for (std::int64_t i = 0; i < k; ++i) x = step(x);
        return x;
    }

    static double density(double x) { return 1.0 / ((1.0 + x) * std::log(2.0)); }

    /// Inverse CDF: F(x) = log2(1+x), so x = 2^u - 1.
    template <class Rng> point_type sample(Rng& rng) const {
        double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
        return std::exp2(u) - 1.0;
    }
};

/// T(y, z) = (S y, z + sigma(y) mod 1): a circle extension of a sampled base.
template <class Base>
class SkewProduct {
public:
    using point_type = std::pair<typename Base::point_type, double>;
    static constexpr bool invertible = Base::invertible;
    bool is_invertible() const { return invertible; }

    SkewProduct(Base base, std::function<double(const typename Base::point_type&)> cocycle)
        : base_(std::move(base)), sigma_(std::move(cocycle)) {}

    const Base& base() const { return base_; }

    point_type apply(point_type p, std::int64_t k) const {
        if (k < 0 && !invertible) throw argument_error("skew product over a non-invertible base: negative exponent");
        for (; k > 0; --k) {
            p.second = frac(p.second + sigma_(p.first));
            p.first = base_.apply(p.first, 1);
        }
        for (; k < 0; ++k) {
            p.first = base_.apply(p.first, -1);
            p.second = frac(p.second - sigma_(p.first));
        }
        return p;
    }

    template <class Rng> point_type sample(Rng& rng) const {
        auto y = base_.sample(rng);
        return {std::move(y), std::uniform_real_distribution<double>(0.0, 1.0)(rng)};
    }

private:
    static double frac(double v) { return v - std::floor(v); }

    Base base_;
    std::function<double(const typename Base::point_type&)> sigma_;
};

/// The Anzai skew product (y, z) -> (y + alpha, z + y) on the 2-torus.
inline SkewProduct<IrrationalRotation> anzai_skew(IrrationalRotation rot) {
    IrrationalRotation copy = rot;
    return SkewProduct<IrrationalRotation>(std::move(rot), [copy](const BigInt& y) { return copy.to_double(y); });
}

/// User-defined map of [0,1) given by forward (and optional backward) functions
/// and an invariant-measure sampler.
class FunctionSystem {
public:
    using point_type = double;

    FunctionSystem(std::function<double(double)> forward, std::function<double(double)> backward,
                   std::function<double(std::mt19937_64&)> sampler)
        : fwd_(std::move(forward)), bwd_(std::move(backward)), sampler_(std::move(sampler)) {
        if (!fwd_ || !sampler_) throw argument_error("function system needs a forward map and a sampler");
    }

    bool is_invertible() const { return static_cast<bool>(bwd_); }

    point_type apply(double x, std::int64_t k) const {
        if (k < 0 && !bwd_) throw argument_error("user-defined map has no inverse; exponent " + std::to_string(k) + " < 0");
        for (; k > 0; --k) x = fwd_(x);
        for (; k < 0; ++k) x = bwd_(x);
        return x;
    }

    point_type sample(std::mt19937_64& rng) const { return sampler_(rng); }

private:
    std::function<double(double)> fwd_, bwd_;
    std::function<double(std::mt19937_64&)> sampler_;
};

}  // namespace ergo
