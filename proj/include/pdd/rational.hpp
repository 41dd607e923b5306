#pragma once

#include <string>
#include <string_view>

#include <boost/multiprecision/gmp.hpp>

namespace pdd {

using BigInt = boost::multiprecision::mpz_int;
// Always canonical: gcd(|num|, den) == 1 and den > 0.
using Rational = boost::multiprecision::mpq_rational;

// "p/q", or "p" when the denominator is 1.
std::string to_string(const Rational& q);
std::string to_string(const BigInt& z);

// Accepts "p/q", integers and finite decimals ("0.25", "-1.5e-3"). Decimal
// input is converted exactly, so "0.1" becomes 1/10, not the nearest double.
Rational parse_rational(std::string_view text);

// Exact rational value of a double (every finite double is a dyadic rational).
Rational exact_rational(double x);

double to_double(const Rational& q);

inline Rational make_rational(long long num, long long den = 1) {
    return Rational(BigInt(num), BigInt(den));
}

}  // namespace pdd
