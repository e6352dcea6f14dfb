#pragma once

// Shared numeric aliases and the error hierarchy used across the library.

#include <gmpxx.h>

#include <array>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace ergo {

using BigInt = mpz_class;
using Rational = mpq_class;

/// Precondition or input-validation failure. Maps to CLI exit code 2.
struct argument_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Mathematical domain failure (e.g. asking for the weight of a constant expression).
struct domain_error : std::domain_error {
    using std::domain_error::domain_error;
};

/// Operation not available on this capability tier.
struct unsupported_error : std::logic_error {
    using std::logic_error::logic_error;
};

/// A configured resource cap would be exceeded. Maps to CLI exit code 3.
struct resource_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// The call may succeed with different parameters (larger shift, denser sampling).
struct retryable_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Lattice site / group element in Z^d, d <= 4. Unused trailing components are zero.
using Site = std::array<std::int64_t, 4>;
inline constexpr int kMaxLatticeDim = 4;

inline Site operator+(Site a, const Site& b) {
    for (int i = 0; i < kMaxLatticeDim; ++i) a[i] += b[i];
    return a;
}
inline Site operator-(Site a, const Site& b) {
    for (int i = 0; i < kMaxLatticeDim; ++i) a[i] -= b[i];
    return a;
}
inline Site operator*(std::int64_t k, Site a) {
    for (auto& c : a) c *= k;
    return a;
}
inline bool is_zero(const Site& s) {
    for (auto c : s)
        if (c != 0) return false;
    return true;
}

inline std::int64_t to_int64(const BigInt& v) {
    if (!v.fits_slong_p()) throw resource_error("integer value " + v.get_str() + " exceeds 64-bit range");
    return v.get_si();
}

inline Rational make_rational(const BigInt& num, const BigInt& den) {
    if (den == 0) throw argument_error("zero denominator");
    Rational q(num, den);
    q.canonicalize();
    return q;
}

inline Rational abs(const Rational& q) { return q < 0 ? Rational(-q) : q; }

/// Parses "a", "a/b", or a decimal literal like "0.25" into an exact rational.
inline Rational parse_rational(const std::string& text) {
    std::string s;
    for (char c : text)
        if (c != ' ') s += c;
    if (s.empty()) throw argument_error("empty rational literal");
    try {
        auto dot = s.find('.');
        if (dot != std::string::npos && s.find('/') == std::string::npos) {
            std::string digits = s.substr(0, dot) + s.substr(dot + 1);
            BigInt den = 1;
            for (std::size_t i = dot + 1; i < s.size(); ++i) den *= 10;
            return make_rational(BigInt(digits), den);
        }
        Rational q(s);
        if (q.get_den() == 0) throw argument_error("zero denominator in '" + text + "'");
        q.canonicalize();
        return q;
    } catch (const std::invalid_argument&) {
        throw argument_error("malformed rational literal '" + text + "'");
    }
}

inline std::string to_string(const Rational& q) { return q.get_str(); }

}  // namespace ergo
