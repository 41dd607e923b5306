#include "pdd/stats.hpp"

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <limits>
#include <numeric>

#include "pdd/errors.hpp"

namespace pdd {

void RunningStats::add(double x) {
    ++n_;
    const double delta = x - mean_;
    mean_ += delta / static_cast<double>(n_);
    m2_ += delta * (x - mean_);
}

void RunningStats::merge(const RunningStats& other) {
    if (other.n_ == 0) return;
    if (n_ == 0) {
        *this = other;
        return;
    }
    const double total = static_cast<double>(n_ + other.n_);
    const double delta = other.mean_ - mean_;
    mean_ += delta * static_cast<double>(other.n_) / total;
    m2_ += other.m2_ + delta * delta * static_cast<double>(n_) * static_cast<double>(other.n_) / total;
    n_ += other.n_;
}

double RunningStats::variance() const { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }

double RunningStats::std_error() const {
    return n_ > 0 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0;
}

MCReport make_mc_report(double exact, const RunningStats& stats, double z_threshold, std::string label) {
    MCReport r;
    r.label = std::move(label);
    r.exact_value = exact;
    r.estimate = stats.mean();
    r.std_error = stats.std_error();
    r.trials = stats.count();
    r.z_threshold = z_threshold;
    const double diff = r.estimate - exact;
    if (std::abs(diff) <= kRoundingAgreement * std::max(1.0, std::abs(exact))) {
        // agreement at rounding level: a z-score against a rounding-level
        // standard error would be meaningless
        r.z_score = 0.0;
        r.pass = true;
    } else if (r.std_error > 0.0) {
        r.z_score = diff / r.std_error;
        r.pass = std::abs(r.z_score) <= z_threshold;
    } else {
        r.z_score = diff > 0.0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
        r.pass = false;
    }
    return r;
}

ChiSquareResult chi_square_test(const std::vector<std::int64_t>& observed, const std::vector<double>& probabilities,
                                double p_floor) {
    if (observed.size() != probabilities.size()) throw DomainError("chi_square_test: size mismatch");
    const double n = static_cast<double>(std::accumulate(observed.begin(), observed.end(), std::int64_t{0}));
    ChiSquareResult r;
    r.p_floor = p_floor;
    if (n == 0.0) throw DomainError("chi_square_test: no observations");

    std::vector<std::size_t> order(observed.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return probabilities[a] < probabilities[b]; });

    double pooled_expected = 0.0, pooled_observed = 0.0;
    bool impossible_hit = false;
    std::vector<std::pair<double, double>> cells;  // (expected, observed)
    for (std::size_t i : order) {
        const double e = probabilities[i] * n;
        const double o = static_cast<double>(observed[i]);
        if (probabilities[i] <= 0.0) {
            if (o > 0.0) impossible_hit = true;
            continue;
        }
        if (e < 5.0 || (pooled_expected > 0.0 && pooled_expected < 5.0)) {
            pooled_expected += e;
            pooled_observed += o;
            continue;
        }
        cells.emplace_back(e, o);
    }
    if (pooled_expected > 0.0) {
        if (pooled_expected < 5.0 && !cells.empty()) {
            cells.front().first += pooled_expected;
            cells.front().second += pooled_observed;
        } else {
            cells.emplace_back(pooled_expected, pooled_observed);
        }
    }
    for (auto [e, o] : cells) r.statistic += (o - e) * (o - e) / e;
    r.cells = static_cast<int>(cells.size());
    r.degrees_of_freedom = r.cells - 1;
    if (impossible_hit) {
        r.p_value = 0.0;
    } else if (r.degrees_of_freedom <= 0) {
        r.p_value = 1.0;
    } else {
        boost::math::chi_squared dist(r.degrees_of_freedom);
        r.p_value = boost::math::cdf(boost::math::complement(dist, r.statistic));
    }
    r.pass = r.p_value > p_floor;
    return r;
}

FamilyReport bonferroni_report(const std::vector<MCReport>& reports, double family_alpha) {
    FamilyReport f;
    f.tests = static_cast<int>(reports.size());
    if (f.tests == 0) {
        f.pass = true;
        return f;
    }
    boost::math::normal standard;
    f.bonferroni_z = boost::math::quantile(boost::math::complement(standard, family_alpha / (2.0 * f.tests)));
    for (const auto& r : reports) {
        const double z = std::abs(r.z_score);
        f.max_abs_z = std::max(f.max_abs_z, z);
        if (!r.pass && r.std_error == 0.0) {
            ++f.failures_at_z3;
            ++f.failures_adjusted;
            continue;
        }
        if (z > 3.0) ++f.failures_at_z3;
        if (z > f.bonferroni_z) ++f.failures_adjusted;
    }
    f.pass = f.failures_adjusted == 0;
    return f;
}

}  // namespace pdd
