#pragma once
// Alternating series for the transition probabilities of the block-counting
// pure-death process (rates n(n+theta-1)/2 from n to n-1, absorbed at 1).
//
// The series cancel catastrophically for small t, so every evaluation runs on
// a ladder of working precisions: double, long double, then MPFR with
// 40, 80, ..., 1280 decimal digits. A rung is accepted when the rounding-error
// estimate of the summed terms is below the requested tolerance.

#include <optional>

namespace pdd {

enum class SeriesKind {
    Labelled,  // d_{nl}, l >= 1
    Zero,      // d_{n0}: no non-mutant line left (requires theta >= 0)
    Absorbed,  // d_{n1} + d_{n0}: the collapsed absorbing state
};

struct SeriesRequest {
    SeriesKind kind = SeriesKind::Labelled;
    std::optional<int> n;  // empty: entrance from infinity
    int l = 1;             // used by Labelled only
    double theta = 0.0;
    double t = 1.0;
};

struct SeriesResult {
    double value = 0.0;       // raw (unclamped) sum
    double error_bound = 0.0; // rounding plus truncation estimate
    int precision_bits = 53;
    int terms = 0;
};

struct SeriesTolerance {
    double relative = 1e-13;
    double absolute = 1e-30;
    double truncation = 1e-16;  // relative tail bound for infinite starts
    int max_terms = 200000;
};

// Throws PrecisionExhausted when even the widest rung fails the tolerance.
SeriesResult evaluate_death_series(const SeriesRequest& request, const SeriesTolerance& tol = {});

}  // namespace pdd
