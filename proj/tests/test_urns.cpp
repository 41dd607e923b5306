#include "doctest.h"

#include <cmath>

#include "oracles.hpp"
#include "pdd/errors.hpp"
#include "pdd/sampling.hpp"
#include "pdd/stats.hpp"
#include "pdd/transition.hpp"
#include "pdd/urns.hpp"

using namespace pdd;

namespace {

std::vector<ExactParams> exact_grid() {
    return {{make_rational(0), make_rational(1)},
            {make_rational(1, 2), make_rational(1)},
            {make_rational(1, 3), make_rational(2)},
            {make_rational(1, 2), make_rational(-1, 4)}};
}

std::vector<Partition> partitions_up_to(int n_max, bool with_empty) {
    std::vector<Partition> out;
    if (with_empty) out.push_back(Partition{});
    for (int n = 1; n <= n_max; ++n)
        for (const auto& eta : enumerate_partitions(n)) out.push_back(eta);
    return out;
}

// Urn weight by its definition: the number of colour classes of omega whose
// increment yields eta, or 1 when eta adds a new colour.
int chi_b_by_colours(const Partition& omega, const Partition& eta) {
    if (eta.size() != omega.size() + 1) return 0;
    if (eta == omega.add_one(0)) return 1;
    int ways = 0;
    for (std::size_t j = 0; j < omega.parts().size(); ++j) {
        std::vector<int> parts = omega.parts();
        ++parts[j];
        if (Partition::from_unsorted(parts) == eta) ++ways;
    }
    return ways;
}

Rational factorial_product(const Partition& eta) {
    Rational out(1);
    for (const auto& [k, a] : multiplicities(eta))
        for (int i = 2; i <= a; ++i) out *= i;
    return out;
}

}  // namespace

TEST_CASE("urn single steps") {
    const Params p{0.5, 1.0};
    Rng rng = make_rng(1);
    for (int i = 0; i < 100; ++i) CHECK(polya_urn_extend(Partition{}, 1, p, rng) == Partition{1});
    CHECK(polya_urn_extend(Partition{2, 1}, 0, p, rng) == Partition{2, 1});

    const ExactParams q{make_rational(1, 2), make_rational(1)};
    CHECK(conditional_partition_prob(Partition{3}, Partition{2}, q) == make_rational(1, 2));
    CHECK(conditional_partition_prob(Partition{2, 1}, Partition{2}, q) == make_rational(1, 2));
    CHECK(conditional_partition_prob(Partition{2, 1}, Partition{2, 1}, q) == Rational(1));
    CHECK(conditional_partition_prob(Partition{1, 1, 1}, Partition{2}, q) == Rational(0));

    std::int64_t three = 0;
    const int trials = 100000;
    for (int i = 0; i < trials; ++i)
        if (polya_urn_extend(Partition{2}, 1, p, rng) == Partition{3}) ++three;
    const double se = std::sqrt(0.25 / trials);
    CHECK(std::abs(static_cast<double>(three) / trials - 0.5) <= 3 * se);
}

TEST_CASE("conditional partition law equals the urn sequence law") {
    for (const auto& q : exact_grid())
        for (const auto& omega : partitions_up_to(3, true))
            for (int m = 0; m <= 3; ++m) {
                if (omega.size() + m == 0) continue;
                const auto law = oracle::urn_sequence_law(omega, m, q.alpha, q.theta);
                std::map<Partition, Rational> combined;
                for (const auto& [key, v] : law) combined[key.first] += v;
                Rational total(0);
                for (const auto& eta : enumerate_partitions(omega.size() + m)) {
                    const Rational exact = conditional_partition_prob(eta, omega, q);
                    const auto it = combined.find(eta);
                    CHECK(exact == (it == combined.end() ? Rational(0) : it->second));
                    total += exact;
                }
                CHECK(total == Rational(1));
            }
}

TEST_CASE("totality over partitions containing (2)") {
    const ExactParams q{make_rational(1, 2), make_rational(1)};
    Rational total(0);
    for (const auto& eta : enumerate_partitions(4)) total += conditional_partition_prob(eta, Partition{2}, q);
    CHECK(total == Rational(1));
}

TEST_CASE("urn weights are conjugate to branching weights") {
    for (int n = 1; n <= 8; ++n)
        for (const auto& eta : enumerate_partitions(n))
            for (const auto& [omega, chi_weight] : covered_by(eta)) {
                const Rational lhs(chi_b_by_colours(omega, eta));
                const Rational rhs = factorial_product(omega) / factorial_product(eta) * Rational(chi_weight);
                CHECK(lhs == rhs);
            }
}

TEST_CASE("urn from empty follows Ewens-Pitman") {
    McConfig cfg;
    cfg.trials = 200000;
    cfg.seed = 7;
    for (const Params& p : {Params{0.5, 1.0}, Params{0.0, 1.0}, Params{0.5, -0.25}}) {
        const auto report = verify_urn_conditional(Partition{}, 4, p, cfg);
        CHECK(report.chi.pass);
        CHECK(report.trials == cfg.trials);
    }
}

TEST_CASE("urn continuation law by chi-square") {
    McConfig cfg;
    cfg.trials = 100000;
    cfg.seed = 11;
    const Params p{0.5, 1.0};
    for (const auto& omega : partitions_up_to(3, false))
        for (int m = 1; m <= 2; ++m) {
            const auto report = verify_urn_conditional(omega, omega.size() + m, p, cfg);
            CHECK_MESSAGE(report.chi.pass, to_string(omega) << " m=" << m << " p=" << report.chi.p_value);
        }
}

TEST_CASE("stick-breaking residual and second moment") {
    // The residual after K sticks decays like K^(-(1 - alpha)/alpha) times a
    // random factor: at alpha = 1/2 it is about 4e-3 in median at K = 500, and
    // falls below 1e-3 in 99% of runs only from K of about 1e4 on.
    const Params p{0.5, 1.0};
    Rng rng = make_rng(3);
    double exact_mean = 1.0;  // prod_j E[1 - V_j]
    for (int j = 1; j <= 500; ++j) exact_mean *= (p.theta + j * p.alpha) / (1.0 + p.theta + (j - 1) * p.alpha);
    RunningStats residual;
    for (int i = 0; i < 20000; ++i) {
        LazyFrequencies x = stick_breaking_sampler(p, rng);
        for (int k = 0; k < 500; ++k) x.realize_next();
        residual.add(x.unrealized_mass());
    }
    CHECK(make_mc_report(exact_mean, residual).pass);
    int small = 0;
    const int runs = 1000;
    for (int i = 0; i < runs; ++i) {
        LazyFrequencies x = stick_breaking_sampler(p, rng);
        for (int k = 0; k < 20000; ++k) x.realize_next();
        if (x.unrealized_mass() < 1e-3) ++small;
    }
    CHECK(small >= 990);

    for (const Params& q : {Params{0.5, 1.0}, Params{0.0, 2.0}, Params{0.3, -0.2}}) {
        RunningStats s;
        for (int i = 0; i < 200000; ++i) {
            LazyFrequencies x = stick_breaking_sampler(q, rng);
            x.realize_until(1e-6);
            s.add(x.power_sums(2)[2]);
        }
        CHECK(make_mc_report((1.0 - q.alpha) / (1.0 + q.theta), s).pass);
    }
}

TEST_CASE("first stick with a small mass parameter") {
    const Params p{0.0, 0.01};
    Rng rng = make_rng(5);
    RunningStats s;
    for (int i = 0; i < 100000; ++i) {
        LazyFrequencies x = stick_breaking_sampler(p, rng);
        x.realize_next();
        s.add(x.atom(0));
    }
    CHECK(make_mc_report(1.0 / 1.01, s).pass);
    CHECK(s.mean() > 0.98);
}

TEST_CASE("lazy extension keeps realised atoms") {
    Rng rng = make_rng(9);
    LazyFrequencies x = stick_breaking_sampler(Params{0.5, 1.0}, rng);
    for (int k = 0; k < 10; ++k) x.realize_next();
    const std::vector<double> before = x.atoms();
    for (int i = 0; i < 1000; ++i) x.draw(rng);
    x.truncated(1e-12);
    REQUIRE(x.size() >= before.size());
    for (std::size_t i = 0; i < before.size(); ++i) CHECK(x.atom(i) == before[i]);
    double sum = 0.0;
    for (std::size_t i = 1; i < x.size(); ++i) CHECK(x.atom(i) >= 0.0);
    for (double a : x.atoms()) sum += a;
    CHECK(std::abs(sum + x.unrealized_mass() - 1.0) < 1e-12);
}

TEST_CASE("individuals drawn from a lazy PD sample follow Ewens-Pitman") {
    const Params p{0.5, 1.0};
    const auto cells = enumerate_partitions(4);
    std::vector<double> probs;
    for (const auto& eta : cells) probs.push_back(ewens_pitman(eta, p));
    std::vector<std::int64_t> counts(cells.size(), 0);
    Rng rng = make_rng(13);
    for (int i = 0; i < 100000; ++i) {
        LazyFrequencies x = stick_breaking_sampler(p, rng);
        const Partition eta = sample_configuration(x, 4, rng);
        ++counts[static_cast<std::size_t>(std::find(cells.begin(), cells.end(), eta) - cells.begin())];
    }
    CHECK(chi_square_test(counts, probs).pass);
}

TEST_CASE("dust individuals get colours of their own") {
    const Frequencies x({0.5, 0.2});
    const auto cells = enumerate_partitions(3);
    std::vector<double> probs;
    for (const auto& eta : cells) probs.push_back(eval_sampling_prob_direct(eta, x));
    double total = 0.0;
    for (double q : probs) total += q;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    std::vector<std::int64_t> counts(cells.size(), 0);
    Rng rng = make_rng(17);
    for (int i = 0; i < 100000; ++i) {
        const Partition eta = sample_configuration(x, 3, rng);
        ++counts[static_cast<std::size_t>(std::find(cells.begin(), cells.end(), eta) - cells.begin())];
    }
    CHECK(chi_square_test(counts, probs).pass);
}

TEST_CASE("posterior sampler conserves mass") {
    Rng rng = make_rng(19);
    for (const auto& omega : {Partition{1}, Partition{2}, Partition{3, 1, 1}})
        for (const Params& p : {Params{0.5, 1.0}, Params{0.0, 0.5}, Params{0.4, -0.3}})
            for (int i = 0; i < 200; ++i) {
                LazyFrequencies y = sample_pd_conditional(omega, p, rng);
                const Frequencies f = y.truncated();
                double sum = f.residual();
                for (double a : f.atoms()) sum += a;
                CHECK(std::abs(sum - 1.0) < 1e-12);
                for (std::size_t k = 1; k < f.atoms().size(); ++k) CHECK(f.atoms()[k] <= f.atoms()[k - 1]);
            }
    CHECK_THROWS_AS(sample_pd_conditional(Partition{}, Params{0.5, 1.0}, rng), DomainError);
}

TEST_CASE("posterior block for a single ball without discount") {
    const Params p{0.0, 2.0};
    Rng rng = make_rng(23);
    RunningStats s;
    for (int i = 0; i < 100000; ++i) {
        LazyFrequencies y = sample_pd_conditional(Partition{1}, p, rng);
        s.add(y.atom(0));  // the Dirichlet block comes first: Z ~ Beta(1, theta)
    }
    CHECK(make_mc_report(1.0 / 3.0, s).pass);
}

TEST_CASE("posterior moments reproduce the urn's new-ball law") {
    const ExactParams q{make_rational(1, 2), make_rational(1)};
    const Params p = to_double(q);
    Rng rng = make_rng(29);
    std::vector<MCReport> reports;
    const auto gammas = partitions_up_to(3, false);
    for (const auto& omega : partitions_up_to(3, false)) {
        std::vector<RunningStats> stats(gammas.size());
        for (int i = 0; i < 40000; ++i) {
            LazyFrequencies y = sample_pd_conditional(omega, p, rng);
            const PowerSums sums = (y.realize_until(1e-6), y.power_sums(3));
            for (std::size_t g = 0; g < gammas.size(); ++g) stats[g].add(sums.sampling_prob(gammas[g]));
        }
        for (std::size_t g = 0; g < gammas.size(); ++g) {
            Rational exact(0);
            for (const auto& [key, v] : oracle::urn_sequence_law(omega, gammas[g].size(), q.alpha, q.theta))
                if (key.second == gammas[g]) exact += v;
            reports.push_back(make_mc_report(to_double(exact), stats[g]));
        }
    }
    const FamilyReport family = bonferroni_report(reports);
    CHECK(family.pass);
    CHECK(family.failures_at_z3 <= 2);
}

TEST_CASE("Radon-Nikodym weights") {
    const Params p{0.5, 1.0};
    CHECK(rn_weight(Partition{1}, Frequencies({0.6, 0.4}), p) == doctest::Approx(1.0));
    CHECK(rn_weight(Partition{}, Frequencies({0.6, 0.4}), p) == 1.0);

    Rng rng = make_rng(31);
    for (const auto& omega : {Partition{2}, Partition{1, 1}, Partition{2, 1}}) {
        RunningStats s;
        for (int i = 0; i < 100000; ++i) {
            LazyFrequencies y = stick_breaking_sampler(p, rng);
            s.add(rn_weight(omega, y.truncated(1e-6), p));
        }
        CHECK_MESSAGE(make_mc_report(1.0, s).pass, to_string(omega));
    }

    McConfig cfg;
    cfg.trials = 100000;
    cfg.seed = 37;
    const auto two = verify_radon_nikodym(Partition{2}, Partition{2}, p, cfg);
    CHECK(two.pass);
}

TEST_CASE("split urn") {
    const Params p{0.5, 1.0};
    Rng rng = make_rng(41);
    // Large t: a single ancestor, two independent continuations.
    {
        const auto law = split_urn_joint_law(3, 40.0, p);
        for (const auto& [key, v] : law)
            CHECK(v == doctest::Approx(ewens_pitman(key.first, p) * ewens_pitman(key.second, p)).epsilon(1e-12));
        for (int i = 0; i < 1000; ++i) {
            const auto draw = split_urn(3, 40.0, p, rng);
            CHECK(draw.defined);
            CHECK(draw.ancestors == 1);
            CHECK(draw.first.size() == 3);
        }
    }
    // Small t: almost always more ancestors than the sample size.
    {
        int undefined = 0;
        for (int i = 0; i < 1000; ++i) {
            const auto draw = split_urn(3, 1e-3, p, rng);
            if (!draw.defined) {
                ++undefined;
                CHECK(draw.first.empty());
                CHECK(draw.second.empty());
            }
        }
        CHECK(undefined > 990);
    }
    // Joint law against the exact mixture.
    for (double t : {1.0, 0.3}) {
        double total = 0.0;
        for (const auto& [key, v] : split_urn_joint_law(3, t, p)) total += v;
        CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    }
    McConfig cfg;
    cfg.trials = 200000;
    cfg.seed = 43;
    for (int n : {2, 3}) {
        const auto report = verify_split_urn(n, 1.0, p, cfg);
        CHECK_MESSAGE(report.chi.pass, "n=" << n << " p=" << report.chi.p_value);
        CHECK(report.trials + report.excluded == cfg.trials);
    }
    const auto wide = verify_split_urn(3, 40.0, p, cfg);
    CHECK(wide.chi.pass);
    CHECK_THROWS_AS(split_urn(0, 1.0, p, rng), DomainError);
}
