#pragma once

// Text syntax for polynomials in n and N.
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary | implicit-product)*
//   unary   := ('+' | '-') unary | power
//   power   := primary (('^' | '**') integer)?
//   primary := integer | rational-literal | 'n' | 'N' | '(' expr ')'
//
// Division is only allowed by constants. "n*(n-1)/2" parses; "n/N" does not.

#include "ergo/intpoly.hpp"

#include <cctype>
#include <string>
#include <string_view>

namespace ergo {

namespace detail {

class PolyParser {
public:
    explicit PolyParser(std::string_view text) : text_(text) {}

    MonomialPoly parse() {
        MonomialPoly p = expr();
        skip_ws();
        if (pos_ != text_.size()) fail("unexpected character '" + std::string(1, text_[pos_]) + "'");
        return p;
    }

private:
    [[noreturn]] void fail(const std::string& what) const {
        throw argument_error("polynomial parse error at offset " + std::to_string(pos_) + " in '" +
                             std::string(text_) + "': " + what);
    }

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool peek(char c) {
        skip_ws();
        return pos_ < text_.size() && text_[pos_] == c;
    }

    bool accept(std::string_view tok) {
        skip_ws();
        if (text_.substr(pos_, tok.size()) == tok) {
            pos_ += tok.size();
            return true;
        }
        return false;
    }

    static MonomialPoly constant(const Rational& c) {
        MonomialPoly p;
        if (c != 0) p.emplace(DegreePair{0, 0}, c);
        return p;
    }

    MonomialPoly expr() {
        MonomialPoly acc = term();
        for (;;) {
            if (accept("+"))
                acc = acc + term();
            else if (accept("-"))
                acc = acc + (-term());
            else
                return acc;
        }
    }

    bool starts_primary() {
        skip_ws();
        if (pos_ >= text_.size()) return false;
        char c = text_[pos_];
        return c == 'n' || c == 'N' || c == '(';
    }

    MonomialPoly term() {
        MonomialPoly acc = unary();
        for (;;) {
            if (peek('*') && text_.substr(pos_, 2) != "**") {
                ++pos_;
                acc = acc * unary();
            } else if (accept("/")) {
                MonomialPoly d = unary();
                if (d.size() != 1 || d.begin()->first != DegreePair{0, 0})
                    fail("division is only allowed by nonzero constants");
                Rational inv = 1 / d.begin()->second;
                acc = acc * constant(inv);
            } else if (starts_primary()) {
                acc = acc * power();  // implicit product, e.g. "3n" or "2(n+1)"
            } else {
                return acc;
            }
        }
    }

    MonomialPoly unary() {
        if (accept("-")) return -unary();
        if (accept("+")) return unary();
        return power();
    }

    MonomialPoly power() {
        MonomialPoly base = primary();
        if (accept("**") || accept("^")) {
            skip_ws();
            std::size_t start = pos_;
            while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
            if (start == pos_) fail("exponent must be a nonnegative integer literal");
            int e = std::stoi(std::string(text_.substr(start, pos_ - start)));
            if (e > 64) fail("exponent too large");
            MonomialPoly out = constant(1);
            for (int i = 0; i < e; ++i) out = out * base;
            return out;
        }
        return base;
    }

    MonomialPoly primary() {
        skip_ws();
        if (pos_ >= text_.size()) fail("unexpected end of input");
        char c = text_[pos_];
        if (c == '(') {
            ++pos_;
            MonomialPoly inner = expr();
            if (!accept(")")) fail("missing ')'");
            return inner;
        }
        if (c == 'n' || c == 'N') {
            ++pos_;
            MonomialPoly p;
            p.emplace(c == 'n' ? DegreePair{1, 0} : DegreePair{0, 1}, Rational(1));
            return p;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::size_t start = pos_;
            while (pos_ < text_.size() &&
                   (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.'))
                ++pos_;
            return constant(parse_rational(std::string(text_.substr(start, pos_ - start))));
        }
        fail("expected a number, 'n', 'N' or '('");
    }

    std::string_view text_;
    std::size_t pos_ = 0;
};

}  // namespace detail

/// Parses into the monomial basis; rational coefficients allowed.
inline MonomialPoly parse_monomial(std::string_view text) { return detail::PolyParser(text).parse(); }

/// Parses and converts to the binomial basis; rejects polynomials that are not
/// integer-valued on integers (e.g. "n/2").
inline IntPoly2 parse_intpoly(std::string_view text) { return IntPoly2::from_monomial(parse_monomial(text)); }

}  // namespace ergo
