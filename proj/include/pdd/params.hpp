#pragma once

#include <string>

#include "pdd/errors.hpp"
#include "pdd/rational.hpp"

namespace pdd {

// Rising factorial a_(k) = a(a+1)...(a+k-1), with a_(0) = 1.
template <class T>
T rising(const T& a, int k) {
    T out(1);
    for (int i = 0; i < k; ++i) out *= a + T(i);
    return out;
}

// Falling factorial a_[k] = a(a-1)...(a-k+1), with a_[0] = 1.
template <class T>
T falling(const T& a, int k) {
    T out(1);
    for (int i = 0; i < k; ++i) out *= a - T(i);
    return out;
}

// (alpha, theta) with 0 <= alpha < 1 and theta > -alpha. Instantiated with
// double and with Rational for the exact backend.
template <class T>
struct BasicParams {
    T alpha{0};
    T theta{1};

    void validate() const {
        if (alpha < T(0) || !(alpha < T(1)))
            throw DomainError("alpha must lie in [0, 1)");
        if (!(theta + alpha > T(0))) throw DomainError("theta must exceed -alpha");
    }
};

using Params = BasicParams<double>;
using ExactParams = BasicParams<Rational>;

inline Params to_double(const ExactParams& p) {
    return Params{to_double(p.alpha), to_double(p.theta)};
}

inline ExactParams to_exact(const Params& p) {
    return ExactParams{exact_rational(p.alpha), exact_rational(p.theta)};
}

inline double as_double(double x) { return x; }
inline double as_double(const Rational& x) { return to_double(x); }

}  // namespace pdd
