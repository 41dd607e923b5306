#include "pdd/rational.hpp"

#include <cmath>
#include <stdexcept>

namespace pdd {

std::string to_string(const Rational& q) {
    const BigInt num = numerator(q);
    const BigInt den = denominator(q);
    if (den == 1) return num.str();
    return num.str() + "/" + den.str();
}

std::string to_string(const BigInt& z) { return z.str(); }

namespace {

BigInt parse_integer(std::string_view s) {
    if (s.empty()) throw std::invalid_argument("empty integer");
    std::size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
    if (i == s.size()) throw std::invalid_argument("malformed integer");
    for (std::size_t j = i; j < s.size(); ++j) {
        if (s[j] < '0' || s[j] > '9')
            throw std::invalid_argument("malformed number: " + std::string(s));
    }
    BigInt z(std::string(s.substr(i)));
    return s[0] == '-' ? BigInt(-z) : z;
}

}  // namespace

Rational parse_rational(std::string_view text) {
    if (text.empty()) throw std::invalid_argument("empty number");
    if (auto slash = text.find('/'); slash != std::string_view::npos) {
        BigInt den = parse_integer(text.substr(slash + 1));
        if (den == 0) throw std::invalid_argument("zero denominator");
        return Rational(parse_integer(text.substr(0, slash)), den);
    }

    std::string_view mantissa = text;
    long exponent = 0;
    if (auto e = text.find_first_of("eE"); e != std::string_view::npos) {
        mantissa = text.substr(0, e);
        exponent = std::stol(std::string(text.substr(e + 1)));
    }
    bool negative = false;
    if (!mantissa.empty() && (mantissa[0] == '-' || mantissa[0] == '+')) {
        negative = mantissa[0] == '-';
        mantissa.remove_prefix(1);
    }
    std::string digits;
    if (auto dot = mantissa.find('.'); dot != std::string_view::npos) {
        digits = std::string(mantissa.substr(0, dot)) + std::string(mantissa.substr(dot + 1));
        exponent -= static_cast<long>(mantissa.size() - dot - 1);
    } else {
        digits = std::string(mantissa);
    }
    if (digits.empty()) throw std::invalid_argument("malformed number: " + std::string(text));
    BigInt value = parse_integer(digits);
    if (negative) value = -value;

    BigInt scale = boost::multiprecision::pow(BigInt(10), static_cast<unsigned>(std::labs(exponent)));
    return exponent >= 0 ? Rational(value * scale) : Rational(value, scale);
}

Rational exact_rational(double x) {
    if (!std::isfinite(x)) throw std::invalid_argument("non-finite value has no rational form");
    int exp = 0;
    double frac = std::frexp(x, &exp);
    // frac * 2^53 is an exact integer
    auto mant = static_cast<long long>(std::ldexp(frac, 53));
    exp -= 53;
    Rational r{BigInt(mant)};
    BigInt two_pow = boost::multiprecision::pow(BigInt(2), static_cast<unsigned>(std::abs(exp)));
    return exp >= 0 ? Rational(r * two_pow) : Rational(r / two_pow);
}

double to_double(const Rational& q) { return q.convert_to<double>(); }

}  // namespace pdd
