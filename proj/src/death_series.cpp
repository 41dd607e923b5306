#include "pdd/death_series.hpp"

#include <boost/multiprecision/mpfr.hpp>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "pdd/errors.hpp"

namespace pdd {

namespace {

namespace mp = boost::multiprecision;
template <unsigned Digits>
using Mpfr = mp::number<mp::mpfr_float_backend<Digits>, mp::et_off>;

// Ratio T_{k+1} / T_k written as a product of (num/den) factors plus the
// exponential factor exp(-t (2k + theta) / 2). Each side of a factor is an
// integer plus 0 or 1 times theta, so it can be formed in any working
// precision without first rounding to double.
struct Affine {
    double integer;  // exactly representable
    int theta_coef;  // 0 or 1

    double approx(double theta) const { return integer + theta_coef * theta; }
    template <class R>
    R in(const R& theta) const {
        return theta_coef ? R(integer) + theta : R(integer);
    }
};

struct RatioFactors {
    std::vector<std::pair<Affine, Affine>> parts;
    double log_decay = 0.0;
};

RatioFactors ratio_factors(const SeriesRequest& q, int k) {
    const double th = q.theta;
    RatioFactors r;
    r.parts.push_back({{2.0 * k + 1.0, 1}, {2.0 * k - 1.0, 1}});
    switch (q.kind) {
        case SeriesKind::Labelled:
            r.parts.push_back({{q.l + k - 1.0, 1}, {k - q.l + 1.0, 0}});
            break;
        case SeriesKind::Zero:
            r.parts.push_back({{k - 1.0, 1}, {k + 1.0, 0}});
            break;
        case SeriesKind::Absorbed:
            r.parts.push_back({{k - 1.0, 1}, {k - 1.0, 0}});
            r.parts.push_back({{static_cast<double>(k), 0}, {k + 1.0, 0}});
            r.parts.push_back({{k + 1.0, 1}, {static_cast<double>(k), 1}});
            break;
    }
    if (q.n) r.parts.push_back({{*q.n - static_cast<double>(k), 0}, {static_cast<double>(*q.n + k), 1}});
    r.log_decay = -q.t * (2.0 * k + th) / 2.0;
    return r;
}

// Every factor is (j + a) / (j + b) and so monotone in j; bounding each by
// max(current value, 1) bounds all later ratios.
double later_ratio_bound(const RatioFactors& r, double theta) {
    double bound = std::exp(r.log_decay);
    for (const auto& [num, den] : r.parts) bound *= std::max(num.approx(theta) / den.approx(theta), 1.0);
    return bound;
}

int first_index(const SeriesRequest& q) {
    switch (q.kind) {
        case SeriesKind::Labelled: return q.l;
        case SeriesKind::Zero: return 1;
        case SeriesKind::Absorbed: return 2;
    }
    return 1;
}

bool term_is_negative(const SeriesRequest& q, int k) {
    switch (q.kind) {
        case SeriesKind::Labelled: return (k - q.l) % 2 != 0;
        case SeriesKind::Zero: return k % 2 != 0;
        case SeriesKind::Absorbed: return k % 2 == 0;
    }
    return false;
}

template <class R>
R log_first_term(const SeriesRequest& q, int k0) {
    using std::log;
    const R th(q.theta);
    R value(0);
    switch (q.kind) {
        case SeriesKind::Labelled: {
            value += log(R(2 * k0 - 1) + th);
            for (int j = 0; j <= k0 - 2; ++j) value += log(R(k0 + j) + th);
            for (int j = 2; j <= k0; ++j) value -= log(R(j));
            break;
        }
        case SeriesKind::Zero:
            value = log(R(1) + th);
            break;
        case SeriesKind::Absorbed:
            value = log(R(3) + th) + log(R(2) + th) - log(R(2));
            break;
    }
    value -= R(k0) * (R(k0 - 1) + th) * R(q.t) / R(2);
    if (q.n)
        for (int j = 0; j < k0; ++j) value += log(R(*q.n - j)) - log(th + R(*q.n + j));
    return value;
}

template <class R>
std::optional<SeriesResult> try_rung(const SeriesRequest& q, const SeriesTolerance& tol) {
    using std::abs;
    using std::exp;
    using std::isfinite;
    using std::log;
    const R eps = std::numeric_limits<R>::epsilon();
    const bool has_constant = q.kind != SeriesKind::Labelled;

    R sum = has_constant ? R(1) : R(0);
    R weight = has_constant ? R(2) : R(0);  // sum of |term| * error multiplier
    R tail(0);
    int terms = has_constant ? 1 : 0;

    const int k0 = first_index(q);
    if (!q.n || k0 <= *q.n) {
        R log_term = log_first_term<R>(q, k0);
        for (int k = k0;; ++k) {
            if (k - k0 > tol.max_terms)
                throw NumericalError("death series: no convergence within " + std::to_string(tol.max_terms) +
                                     " terms");
            const R term = exp(log_term);
            if (!isfinite(term)) return std::nullopt;
            sum += term_is_negative(q, k) ? R(-term) : term;
            const double holding = k * (k + q.theta - 1.0) * q.t / 2.0;
            weight += term * (R(k - k0 + 2) + abs(log_term) + R(holding));
            ++terms;
            if (q.n && k == *q.n) break;

            const RatioFactors ratio = ratio_factors(q, k);
            bool vanishes = false;
            for (const auto& [num, den] : ratio.parts) vanishes = vanishes || num.approx(q.theta) == 0.0;
            if (vanishes) break;  // every later term is zero

            if (!q.n) {
                const double bound = later_ratio_bound(ratio, q.theta);
                if (bound < 0.5) {
                    const R tail_here = term * R(bound / (1.0 - bound));
                    if (tail_here <= R(tol.truncation) * abs(sum) || tail_here <= R(tol.absolute)) {
                        tail = tail_here;
                        break;
                    }
                }
            }
            R step = -R(q.t) * (R(2 * k) + R(q.theta)) / R(2);  // exact inputs, rounded once in R
            const R theta(q.theta);
            for (const auto& [num, den] : ratio.parts) step += log(num.in(theta) / den.in(theta));
            log_term += step;
        }
    }

    const R error = eps * weight + tail;
    if (!isfinite(sum) || !isfinite(error)) return std::nullopt;
    if (error > R(tol.relative) * abs(sum) && error > R(tol.absolute)) return std::nullopt;
    return SeriesResult{static_cast<double>(sum), static_cast<double>(error), std::numeric_limits<R>::digits, terms};
}

void validate(const SeriesRequest& q) {
    if (!(q.theta > -1.0) || !std::isfinite(q.theta)) throw DomainError("death series: theta must exceed -1");
    if (!(q.t > 0.0) || !std::isfinite(q.t)) throw DomainError("death series: t must be positive and finite");
    if (q.n && *q.n < 1) throw DomainError("death series: n must be at least 1");
    if (q.kind == SeriesKind::Labelled) {
        if (q.l < 1) throw DomainError("death series: l must be at least 1");
        if (q.n && q.l > *q.n) throw DomainError("death series: l must not exceed n");
    }
    if (q.kind == SeriesKind::Zero) {
        if (q.theta < 0.0) throw DomainError("death series: d_{n0} is only a probability for theta >= 0");
        if (!q.n) throw DomainError("death series: d_{n0} needs a finite start");
    }
}

}  // namespace

SeriesResult evaluate_death_series(const SeriesRequest& request, const SeriesTolerance& tol) {
    validate(request);
    if (auto r = try_rung<double>(request, tol)) return *r;
    if (auto r = try_rung<long double>(request, tol)) return *r;
    if (auto r = try_rung<Mpfr<40>>(request, tol)) return *r;
    if (auto r = try_rung<Mpfr<80>>(request, tol)) return *r;
    if (auto r = try_rung<Mpfr<160>>(request, tol)) return *r;
    if (auto r = try_rung<Mpfr<320>>(request, tol)) return *r;
    if (auto r = try_rung<Mpfr<640>>(request, tol)) return *r;
    if (auto r = try_rung<Mpfr<1280>>(request, tol)) return *r;
    throw PrecisionExhausted("death series: cancellation not resolved at 1280 decimal digits (t = " +
                             std::to_string(request.t) + ")");
}

}  // namespace pdd
