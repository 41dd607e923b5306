#pragma once
// Small statistics toolkit shared by the Monte Carlo verifiers.

#include <cstdint>
#include <string>
#include <vector>

namespace pdd {

// Welford accumulator; merge() pools two shards exactly (Chan et al.).
class RunningStats {
public:
    void add(double x);
    void merge(const RunningStats& other);
    std::int64_t count() const { return n_; }
    double mean() const { return mean_; }
    double variance() const;  // unbiased
    double std_error() const;

private:
    std::int64_t n_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

struct MCReport {
    std::string label;
    double exact_value = 0.0;
    double estimate = 0.0;
    double std_error = 0.0;
    std::int64_t trials = 0;
    double z_score = 0.0;
    double z_threshold = 3.0;
    bool pass = false;
};

// Estimates within this relative distance of the exact value count as exact
// agreement (the estimator is constant up to rounding).
inline constexpr double kRoundingAgreement = 1e-12;

// pass <=> |z| <= threshold, or agreement within kRoundingAgreement.
MCReport make_mc_report(double exact, const RunningStats& stats, double z_threshold = 3.0, std::string label = {});

struct ChiSquareResult {
    double statistic = 0.0;
    int degrees_of_freedom = 0;
    double p_value = 1.0;
    int cells = 0;         // cells after pooling
    double p_floor = 1e-3;
    bool pass = false;     // p_value > p_floor
};

// Pearson goodness of fit of counts against cell probabilities (which must sum
// to one). Cells with expected count below 5 are pooled, smallest first, into
// a single cell so the asymptotic law applies. Observations in cells with zero
// probability force p = 0.
ChiSquareResult chi_square_test(const std::vector<std::int64_t>& observed, const std::vector<double>& probabilities,
                                double p_floor = 1e-3);

// Bonferroni summary of a family of z-tests: each |z| is compared
// with the two-sided normal quantile at level family_alpha / m.
struct FamilyReport {
    int tests = 0;
    int failures_at_z3 = 0;       // individual |z| > 3
    double bonferroni_z = 0.0;    // adjusted critical value
    int failures_adjusted = 0;    // |z| > bonferroni_z
    double max_abs_z = 0.0;
    bool pass = false;            // failures_adjusted == 0
};
FamilyReport bonferroni_report(const std::vector<MCReport>& reports, double family_alpha = 0.0027);

}  // namespace pdd
