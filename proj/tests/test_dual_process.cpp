#include "doctest.h"

#include <cmath>

#include "death_oracle.hpp"
#include "pdd/death_series.hpp"
#include "pdd/dual_process.hpp"
#include "pdd/errors.hpp"
#include "pdd/sampling.hpp"
#include "pdd/stats.hpp"

using namespace pdd;

namespace {

const std::vector<int> kSizes{2, 5, 10, 25, 50};
const std::vector<double> kThetas{-0.5, 0.0, 1.0, 5.0};
const std::vector<double> kTimes{0.01, 0.1, 1.0, 10.0};

// Row l of the table, with l = 1 meaning the collapsed absorbing mass when the
// table is collapsed.
double row(const DeathProbTable& table, int l) { return l == 1 ? table.absorbed() : table.values.at(l); }

bool close(double a, double b, double rel, double abs) { return std::abs(a - b) <= std::max(abs, rel * std::abs(b)); }

}  // namespace

TEST_CASE("two-block holding probability") {
    for (double theta : {-0.9, -0.5, 0.0, 0.3, 1.0, 5.0})
        for (double t : {1e-3, 0.1, 0.7, 3.0, 20.0}) {
            const double expected = std::exp(-(1.0 + theta) * t);
            CHECK(death_prob_finite(2, 2, theta, t) == doctest::Approx(expected).epsilon(1e-15));
            CHECK(absorbed_prob_finite(2, theta, t) == doctest::Approx(1.0 - expected).epsilon(1e-14));
        }
}

TEST_CASE("small t is close to the identity") {
    CHECK(death_prob_finite(5, 5, 0.5, 1e-6) > 0.999);
    CHECK(death_prob_finite(5, 4, 0.5, 1e-6) < 1e-4);
    CHECK(absorbed_prob_finite(5, 0.5, 1e-6) < 1e-12);
}

TEST_CASE("domain errors") {
    CHECK_THROWS_AS(death_prob_finite(5, 2, -1.0, 1.0), DomainError);
    CHECK_THROWS_AS(death_prob_finite(5, 6, 0.5, 1.0), DomainError);
    CHECK_THROWS_AS(death_prob_finite(5, 2, 0.5, 0.0), DomainError);
    CHECK_THROWS_AS(death_prob_finite(5, 1, -0.5, 1.0), DomainError);
    CHECK_THROWS_AS(death_prob_finite(5, 0, -0.5, 1.0), DomainError);
    CHECK_THROWS_AS(death_prob_infinite(1, -0.5, 1.0), DomainError);
    CHECK_THROWS_AS(absorb_prob(-1.5, 1.0), DomainError);
    CHECK_NOTHROW(death_prob_finite(5, 2, -0.95, 1.0));
}

TEST_CASE("clamping separates roundoff from errors") {
    CHECK(clamp_probability(-5e-10, "x") == 0.0);
    CHECK(clamp_probability(1.0 + 5e-10, "x") == 1.0);
    CHECK(clamp_probability(0.25, "x") == 0.25);
    CHECK_THROWS_AS(clamp_probability(-1e-8, "x"), NumericalError);
    CHECK_THROWS_AS(clamp_probability(1.1, "x"), NumericalError);
}

TEST_CASE("series match the hypoexponential representation (n <= 12)") {
    for (double theta : {-0.5, 0.0, 0.5, 1.0, 5.0})
        for (double t : kTimes)
            for (int n = 1; n <= 12; ++n) {
                const auto collapsed = oracle::block_rates(n, theta, true);
                CHECK(close(absorbed_prob_finite(n, theta, t), oracle::pure_death_prob(n, 1, collapsed, t), 1e-10,
                            1e-15));
                for (int l = 2; l <= n; ++l)
                    CHECK(close(death_prob_finite(n, l, theta, t), oracle::pure_death_prob(n, l, collapsed, t), 1e-10,
                                1e-15));
                if (theta > 0.0) {
                    const auto labelled = oracle::block_rates(n, theta, false);
                    const double d1 = oracle::pure_death_prob(n, 1, labelled, t);
                    CHECK(close(death_prob_finite(n, 1, theta, t), d1, 1e-10, 1e-15));
                    double rest = 0.0;
                    for (int l = 1; l <= n; ++l) rest += oracle::pure_death_prob(n, l, labelled, t);
                    CHECK(close(death_prob_finite(n, 0, theta, t), 1.0 - rest, 1e-9, 1e-14));
                }
            }
}

TEST_CASE("non-dyadic theta keeps full relative accuracy in tiny entries") {
    // Cancellation of order 1e40 at small t: every factor of the series must
    // be formed in the working precision, not rounded to double first.
    for (double theta : {0.7, 0.3, -0.3, 2.1})
        for (double t : {0.02, 0.05, 0.1}) {
            CAPTURE(theta);
            CAPTURE(t);
            for (int n : {8, 12}) {
                const auto collapsed = oracle::block_rates(n, theta, true);
                for (int l = 2; l <= n; ++l)
                    CHECK(close(death_prob_finite(n, l, theta, t), oracle::pure_death_prob(n, l, collapsed, t), 1e-10,
                                1e-30));
            }
            for (int l : {2, 5, 12, 20, 40}) {
                CAPTURE(l);
                CHECK(close(death_prob_infinite(l, theta, t), oracle::entrance_prob(l, theta, t), 1e-9, 1e-29));
            }
            CHECK_NOTHROW(death_prob_table_infinite(theta, t));
        }
}

TEST_CASE("theta = 0: the labelled chain never reaches 0") {
    for (int n : {3, 10})
        for (double t : {0.1, 2.0}) CHECK(death_prob_finite(n, 0, 0.0, t) == 0.0);
}

TEST_CASE("row sums on the grid") {
    for (int n : kSizes)
        for (double theta : kThetas)
            for (double t : kTimes) {
                const DeathProbTable table = death_prob_table(n, theta, t);
                CHECK(std::abs(table.total() - 1.0) <= 1e-10);
                CHECK(table.collapsed == (theta < 0.0));
                CHECK(table.precision_used() >= 53);
                for (const auto& [l, v] : table.values) {
                    CHECK(v >= 0.0);
                    CHECK(v <= 1.0);
                }
            }
}

TEST_CASE("Chapman-Kolmogorov on the grid") {
    for (int n : kSizes)
        for (double theta : kThetas)
            for (double s : kTimes)
                for (double t : kTimes) {
                    const DeathProbTable first = death_prob_table(n, theta, s);
                    const DeathProbTable combined = death_prob_table(n, theta, s + t);
                    std::vector<DeathProbTable> second;
                    for (int m = 1; m <= n; ++m) second.push_back(death_prob_table(m, theta, t));
                    for (int l = 1; l <= n; ++l) {
                        double sum = 0.0;
                        for (int m = l; m <= n; ++m) sum += row(first, m) * row(second[m - 1], l);
                        CHECK(std::abs(sum - row(combined, l)) <= 1e-8);
                    }
                }
}

TEST_CASE("d_nn decreases in t") {
    for (int n : {2, 5, 10, 25})
        for (double theta : kThetas) {
            double previous = 1.0;
            for (double t = 0.005; t < 5.0; t *= 1.5) {
                const double v = death_prob_finite(n, n, theta, t);
                if (previous > 1e-300)
                    CHECK(v < previous);
                else
                    CHECK(v <= previous);
                previous = v;
            }
        }
}

TEST_CASE("precision ladder escalates for small t and reports it") {
    const SeriesResult easy = evaluate_death_series({SeriesKind::Labelled, 10, 3, 0.5, 1.0});
    CHECK(easy.precision_bits == 53);
    const SeriesResult hard = evaluate_death_series({SeriesKind::Labelled, 50, 2, 0.5, 0.01});
    CHECK(hard.precision_bits > 64);
    CHECK(hard.error_bound <= std::max(1e-13 * std::abs(hard.value), 1e-30));
    // a tolerance nothing can meet exhausts the ladder
    SeriesTolerance impossible;
    impossible.relative = 0.0;
    impossible.absolute = 0.0;
    CHECK_THROWS_AS(evaluate_death_series({SeriesKind::Labelled, 10, 3, 0.5, 1.0}, impossible), PrecisionExhausted);
}

TEST_CASE("entrance from infinity") {
    for (double t : {0.1, 1.0, 10.0}) {
        double total = absorb_prob(0.5, t);
        for (int l = 2; l < 400; ++l) total += death_prob_infinite(l, 0.5, t);
        CHECK(std::abs(total - 1.0) <= 1e-10);
    }
    for (int l = 2; l <= 30; ++l) CHECK(death_prob_infinite(l, 1.0, 50.0) < 1e-12);

    // the finite-n values converge at rate 1/n; Richardson extrapolation of
    // n = 2000, 4000, 8000 recovers the limit
    auto at = [](int n) { return death_prob_finite(n, 2, 0.0, 1.0); };
    const double limit = death_prob_infinite(2, 0.0, 1.0);
    const double a = at(2000), b = at(4000), c = at(8000);
    CHECK(std::abs(a - limit) > std::abs(b - limit));
    CHECK(std::abs(b - limit) > std::abs(c - limit));
    CHECK((a - limit) * 2000 == doctest::Approx((c - limit) * 8000).epsilon(0.01));
    const double r1 = 2 * b - a, r2 = 2 * c - b;
    const double richardson = (4 * r2 - r1) / 3;
    CHECK(std::abs(richardson - limit) <= 1e-8);

    // labelled d_1 plus d_0 from infinity is the absorbed mass
    for (double t : {0.3, 2.0}) {
        double rest = 0.0;
        for (int l = 2; l < 200; ++l) rest += death_prob_infinite(l, 1.0, t);
        CHECK(death_prob_infinite(1, 1.0, t) <= absorb_prob(1.0, t) + 1e-15);
        CHECK(absorb_prob(1.0, t) == doctest::Approx(1.0 - rest).epsilon(1e-10));
    }
}

TEST_CASE("Chapman-Kolmogorov from infinity") {
    for (double theta : {-0.5, 1.0})
        for (auto [s, t] : std::vector<std::pair<double, double>>{{0.2, 0.3}, {0.5, 1.0}}) {
            const DeathProbTable from_inf = death_prob_table_infinite(theta, s);
            const DeathProbTable later = death_prob_table_infinite(theta, s + t);
            for (int l = 1; l <= 6; ++l) {
                double sum = 0.0;
                for (const auto& [m, p] : from_inf.values)
                    if (m >= l) sum += p * row(death_prob_table(m, theta, t), l);
                CHECK(std::abs(sum - later.values.at(l)) <= 1e-9);
            }
        }
}

TEST_CASE("absorb_prob") {
    CHECK(absorb_prob(0.5, 200.0) == doctest::Approx(1.0).epsilon(1e-14));
    const double negative_theta = absorb_prob(-0.5, 0.5);
    CHECK(negative_theta > 0.0);
    CHECK(negative_theta < 1.0);
    CHECK(absorb_prob(1.0, 0.01) < 1e-6);
    // cross-check against the complement of the table mass
    for (double theta : {-0.5, 0.5})
        for (double t : {0.2, 1.0, 4.0}) {
            const DeathProbTable table = death_prob_table_infinite(theta, t);
            double rest = 0.0;
            for (const auto& [l, v] : table.values)
                if (l >= 2) rest += v;
            CHECK(std::abs(absorb_prob(theta, t) - (1.0 - rest)) <= 1e-11);
        }
}

TEST_CASE("dual transition") {
    const double theta = 1.0, t = 0.5;
    CHECK(dual_transition({2}, {2}, 0.3, 0.7) == doctest::Approx(std::exp(-1.3 * 0.7)).epsilon(1e-15));
    CHECK(dual_transition({2, 1}, {2}, theta, t) ==
          doctest::Approx(death_prob_finite(3, 2, theta, t) / 3.0).epsilon(1e-15));
    CHECK(dual_transition({2, 1}, {3}, theta, t) == 0.0);
    CHECK(dual_transition({1}, {1}, theta, t) == 1.0);
    CHECK_THROWS_AS(dual_transition({2, 1}, {}, theta, t), DomainError);

    for (double th : {-0.5, 0.5})
        for (int n = 1; n <= 7; ++n)
            for (const auto& eta : enumerate_partitions(n)) {
                double total = 0.0;
                for (int m = 1; m <= n; ++m)
                    for (const auto& omega : enumerate_partitions(m)) total += dual_transition(eta, omega, th, t);
                CHECK(std::abs(total - 1.0) <= 1e-10);
            }
}

TEST_CASE("death paths") {
    Rng rng = make_rng(7, 0);
    const DeathPath still = simulate_death_path({1}, 0.5, 100.0, rng);
    CHECK(still.jump_times.empty());
    CHECK(still.states.size() == 1);

    for (int rep = 0; rep < 200; ++rep) {
        const DeathPath path = simulate_death_path({3, 2, 1}, 0.5, 2.0, rng);
        REQUIRE(path.states.size() == path.jump_times.size() + 1);
        for (std::size_t i = 0; i + 1 < path.states.size(); ++i) {
            CHECK(path.states[i + 1].size() == path.states[i].size() - 1);
            CHECK(is_subpartition(path.states[i + 1], path.states[i]));
        }
        for (std::size_t i = 0; i + 1 < path.jump_times.size(); ++i) CHECK(path.jump_times[i] < path.jump_times[i + 1]);
        if (!path.jump_times.empty()) CHECK(path.jump_times.back() <= 2.0);
        CHECK(path.states.back().size() >= 1);
    }
    CHECK_THROWS_AS(simulate_death_path({2}, -1.0, 1.0, rng), DomainError);
}

TEST_CASE("Monte Carlo: mean holding time at two blocks") {
    const double theta = 0.5;
    Rng rng = make_rng(11, 0);
    RunningStats stats;
    for (int i = 0; i < 100000; ++i) {
        const DeathPath path = simulate_death_path({1, 1}, theta, 1e9, rng);
        stats.add(path.jump_times.at(0));
    }
    CHECK(make_mc_report(1.0 / (1.0 + theta), stats).pass);
}

TEST_CASE("Monte Carlo: block counts from 6 and from 10 match the table") {
    Rng rng = make_rng(12, 0);
    for (auto [n, theta, t] : std::vector<std::tuple<int, double, double>>{{6, 0.5, 0.3}, {10, 0.5, 0.5}, {6, -0.5, 1.0}}) {
        const DeathProbTable table = death_prob_table(n, theta, t);
        const int trials = 1000000;
        std::vector<std::int64_t> counts(static_cast<std::size_t>(n) + 1, 0);
        for (int i = 0; i < trials; ++i) ++counts[static_cast<std::size_t>(simulate_block_count(n, theta, t, rng))];
        for (int l = 1; l <= n; ++l) {
            const double p_hat = static_cast<double>(counts[static_cast<std::size_t>(l)]) / trials;
            const double exact = row(table, l);
            const double se = std::sqrt(exact * (1 - exact) / trials);
            CHECK(std::abs(p_hat - exact) <= 3.0 * se + 1e-12);
        }
    }
}

TEST_CASE("Monte Carlo: partition-valued dual from (3,2,1)") {
    const Partition eta{3, 2, 1};
    const double theta = 0.5, t = 0.4;
    Rng rng = make_rng(13, 0);
    const int trials = 1000000;
    std::map<Partition, std::int64_t> counts;
    for (int i = 0; i < trials; ++i) ++counts[simulate_death_state(eta, theta, t, rng)];
    std::vector<std::int64_t> observed;
    std::vector<double> probs;
    for (int m = 1; m <= 6; ++m)
        for (const auto& omega : enumerate_partitions(m)) {
            const double q = dual_transition(eta, omega, theta, t);
            if (q == 0.0) {
                CHECK(counts.count(omega) == 0);
                continue;
            }
            const std::int64_t c = counts.count(omega) ? counts.at(omega) : 0;
            const double p_hat = static_cast<double>(c) / trials;
            CHECK(std::abs(p_hat - q) <= 3.0 * std::sqrt(q * (1 - q) / trials) + 1e-12);
            observed.push_back(c);
            probs.push_back(q);
        }
    CHECK(chi_square_test(observed, probs).pass);
}

TEST_CASE("block count sampler from infinity") {
    Rng rng = make_rng(21, 0);
    int ones = 0;
    for (int i = 0; i < 1000; ++i) ones += sample_block_count_from_infinity(1.0, 100.0, rng) == 1;
    CHECK(ones == 1000);
    CHECK(block_count_sampler(1.0, 100.0)->probability(1) >= 1.0 - 1e-10);

    {
        const auto sampler = block_count_sampler(1.0, 1.0);
        const int trials = 1000000;
        std::vector<std::int64_t> counts(static_cast<std::size_t>(sampler->max_count()), 0);
        for (int i = 0; i < trials; ++i) ++counts[static_cast<std::size_t>((*sampler)(rng) - 1)];
        std::vector<double> probs;
        for (int w = 1; w <= sampler->max_count(); ++w) probs.push_back(sampler->probability(w));
        CHECK(chi_square_test(counts, probs).pass);
        CHECK(sampler->probability(1) == doctest::Approx(absorb_prob(1.0, 1.0)).epsilon(1e-14));
        CHECK(sampler->probability(3) == doctest::Approx(death_prob_infinite(3, 1.0, 1.0)).epsilon(1e-14));
    }
    {
        const auto sampler = block_count_sampler(0.5, 0.05);
        RunningStats stats;
        for (int i = 0; i < 200000; ++i) stats.add((*sampler)(rng));
        CHECK(make_mc_report(sampler->mean(), stats).pass);
        CHECK(sampler->table().total() >= 1.0 - 1e-11);
    }
}

TEST_CASE("generator coefficients: examples") {
    const ExactParams p{make_rational(1, 3), make_rational(2)};
    const Rational& a = p.alpha;
    const Rational& th = p.theta;
    auto two = generator_coefficients(Partition{2}, p);
    CHECK(two.terms.size() == 2);
    CHECK(two.coefficient({2}) == -(1 + th));
    CHECK(two.coefficient({1}) == 1 - a);

    CHECK(generator_coefficients(Partition{1}, p).coefficient({1}) == 0);

    auto two_one = generator_coefficients(Partition{2, 1}, p);
    CHECK(two_one.coefficient({2, 1}) == -make_rational(3, 2) * (2 + th));
    CHECK(two_one.coefficient({1, 1}) == 1 - a);
    CHECK(two_one.coefficient({2}) == (th + a) / 2);

    const Params d{0.25, 1.5};
    auto approx = generator_coefficients(Partition{3, 1, 1}, d);
    auto exact = generator_coefficients(Partition{3, 1, 1}, to_exact(d));
    for (const auto& [key, value] : exact.terms) CHECK(approx.coefficient(key) == doctest::Approx(to_double(value)));
}

TEST_CASE("generator coefficients: the two routes agree (|eta| <= 7)") {
    const std::vector<ExactParams> grid{{make_rational(0), make_rational(1)},
                                        {make_rational(1, 2), make_rational(1)},
                                        {make_rational(1, 3), make_rational(2)},
                                        {make_rational(1, 2), make_rational(-1, 4)}};
    for (const auto& p : grid)
        for (int n = 1; n <= 7; ++n)
            for (const auto& eta : enumerate_partitions(n)) {
                const auto closed = to_singleton_free(generator_coefficients(eta, p));
                const auto eliminated = generator_coefficients_by_elimination(eta, p);
                CHECK(closed == eliminated);
                for (const auto& [mu, c] : eliminated.terms) CHECK(mu.multiplicity(1) == 0);
            }
}

TEST_CASE("dual generator coefficients") {
    const ExactParams p{make_rational(1, 2), make_rational(1)};
    auto two = dual_generator_coefficients(Partition{2}, p);
    CHECK(two.coefficient({2}) == -2);
    CHECK(two.coefficient({1}) == 2);

    auto two_one = dual_generator_coefficients(Partition{2, 1}, p);
    CHECK(two_one.coefficient({2, 1}) == make_rational(-9, 2));
    CHECK(two_one.coefficient({1, 1}) == 3);
    CHECK(two_one.coefficient({2}) == make_rational(3, 2));

    const ExactParams zero_theta{make_rational(1, 2), make_rational(0)};
    auto at_zero = dual_generator_coefficients(Partition{2, 1}, zero_theta);
    CHECK(at_zero.coefficient({2, 1}) == -3);
    CHECK(at_zero.coefficient({1, 1}) == 2);
    CHECK(at_zero.coefficient({2}) == 1);

    for (int n = 2; n <= 7; ++n)
        for (const auto& eta : enumerate_partitions(n)) CHECK(dual_generator_coefficients(eta, p).sum() == 0);
    CHECK_THROWS_AS(dual_generator_coefficients(Partition{1}, p), DomainError);
}

TEST_CASE("generator-level duality L g = A g (|eta| <= 7)") {
    const std::vector<ExactParams> grid{{make_rational(0), make_rational(1)},
                                        {make_rational(1, 2), make_rational(1)},
                                        {make_rational(1, 3), make_rational(2)},
                                        {make_rational(1, 2), make_rational(-1, 4)},
                                        {make_rational(1, 4), make_rational(0)}};
    for (const auto& p : grid)
        for (int n = 2; n <= 7; ++n)
            for (const auto& eta : enumerate_partitions(n)) {
                const auto check = check_generator_duality(eta, p);
                CHECK(check.holds);
                CHECK(!check.lhs.terms.empty());
            }
}

TEST_CASE("small-time block count sampler matches the exact table") {
    for (double theta : {1.0, -0.5}) {
        const double t = 0.02;
        const auto exact = block_count_sampler(theta, t);
        const SmallTimeBlockCountSampler fast(theta, t);
        CHECK(fast.cutoff() == 500);
        std::vector<double> probs;
        for (int w = 1; w <= exact->max_count(); ++w) probs.push_back(exact->probability(w));
        double total = 0.0;
        for (double q : probs) total += q;
        for (double& q : probs) q /= total;
        std::vector<std::int64_t> counts(probs.size(), 0);
        Rng rng = make_rng(77);
        for (int i = 0; i < 200000; ++i) {
            const int w = fast(rng);
            REQUIRE(w >= 1);
            REQUIRE(w <= static_cast<int>(counts.size()));
            ++counts[static_cast<std::size_t>(w - 1)];
        }
        const auto chi = chi_square_test(counts, probs);
        CHECK_MESSAGE(chi.pass, "theta=" << theta << " p=" << chi.p_value);
    }
    Rng rng = make_rng(78);
    RunningStats s;
    for (int i = 0; i < 2000; ++i) s.add(sample_block_count_from_infinity(1.0, 1e-3, rng));
    CHECK(s.mean() == doctest::Approx(2000.0).epsilon(0.02));
}
