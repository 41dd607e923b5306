#include "pdd/transition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pdd/dual_process.hpp"
#include "pdd/errors.hpp"
#include "pdd/sampling.hpp"

namespace pdd {

namespace {

constexpr int kDensityOrderCap = 30;

void check_order(int n, const char* what) {
    if (n < 0) throw DomainError(std::string(what) + ": order must be non-negative");
    if (n > kDensityOrderCap) throw ResourceLimit(std::string(what) + ": order exceeds the enumeration cap of 30");
}

// p_0, ..., p_n_max in one pass.
std::vector<long double> kernel_p_all(const Frequencies& x, const Frequencies& y, int n_max, const Params& p) {
    p.validate();
    check_order(n_max, "kernel_p_n");
    std::vector<long double> out(static_cast<std::size_t>(n_max) + 1, 0.0L);
    out[0] = 1.0L;
    for (int n = 1; n <= n_max; ++n) {
        long double total = 0.0L;
        for (const Partition& eta : enumerate_partitions(n)) {
            const double px = eval_sampling_prob_direct(eta, x);
            if (px == 0.0) continue;
            const double py = eval_sampling_prob_direct(eta, y);
            if (py == 0.0) continue;
            total += static_cast<long double>(px) * py / ewens_pitman(eta, p);
        }
        out[static_cast<std::size_t>(n)] = total;
    }
    return out;
}

double spectral_rate(int m, double theta, double t) { return std::exp(-0.5 * m * (m + theta - 1.0) * t); }

LazyFrequencies transition_from_configuration(const Partition& omega, const Params& p, Rng& rng) {
    if (omega.size() == 1) return stick_breaking_sampler(p, rng);
    return sample_pd_conditional(omega, p, rng);
}

// Largest part size among a set of partitions.
int max_size(const std::vector<Partition>& etas) {
    int n = 0;
    for (const auto& eta : etas) n = std::max(n, eta.size());
    return n;
}

std::vector<RunningStats> merge_all(std::vector<RunningStats> into, const std::vector<RunningStats>& from) {
    for (std::size_t i = 0; i < into.size(); ++i) into[i].merge(from[i]);
    return into;
}

}  // namespace

double kernel_p_n(const Frequencies& x, const Frequencies& y, int n, const Params& p) {
    return static_cast<double>(kernel_p_all(x, y, n, p).back());
}

template <class T>
T combine_q_m(int m, const T& theta, const std::vector<T>& p_values) {
    if (m < 2) throw DomainError("kernel_q_m: m must be at least 2");
    if (p_values.size() < static_cast<std::size_t>(m) + 1) throw DomainError("kernel_q_m: need p_0 .. p_m");
    T sum(0);
    T binom(1);  // binom(m, n)
    for (int n = 0; n <= m; ++n) {
        if (n > 0) binom = binom * T(m - n + 1) / T(n);
        T term = binom * rising(T(n) + theta, m - 1) * p_values[static_cast<std::size_t>(n)];
        if ((m - n) % 2 == 0)
            sum += term;
        else
            sum -= term;
    }
    T factorial(1);
    for (int i = 2; i <= m; ++i) factorial *= T(i);
    return (T(2 * m - 1) + theta) / factorial * sum;
}

template double combine_q_m(int, const double&, const std::vector<double>&);
template long double combine_q_m(int, const long double&, const std::vector<long double>&);
template Rational combine_q_m(int, const Rational&, const std::vector<Rational>&);

double kernel_q_m(const Frequencies& x, const Frequencies& y, int m, const Params& p) {
    if (m < 2) throw DomainError("kernel_q_m: m must be at least 2");
    return static_cast<double>(combine_q_m<long double>(m, p.theta, kernel_p_all(x, y, m, p)));
}

DensityEval density_mixture(const Frequencies& x, const Frequencies& y, double t, const Params& p, int n_max) {
    if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("density_mixture: t must be positive");
    if (n_max < 1) throw DomainError("density_mixture: n_max must be at least 1");
    check_order(n_max, "density_mixture");
    const auto kernels = kernel_p_all(x, y, n_max, p);
    DensityEval out;
    out.form = DensityForm::Mixture;
    out.truncation_order = n_max;
    long double value = absorb_prob(p.theta, t);
    long double mass = value;
    for (int n = 2; n <= n_max; ++n) {
        const double d = death_prob_infinite(n, p.theta, t);
        mass += d;
        value += static_cast<long double>(d) * kernels[static_cast<std::size_t>(n)];
    }
    out.value = static_cast<double>(value);
    // Remaining block-count mass times the largest 1 / M_{n_max+1}(eta); p_n is
    // not uniformly bounded, so this is an engineering figure only.
    const double remaining = std::max(0.0, static_cast<double>(1.0L - mass));
    double worst = 0.0;
    if (remaining > 0.0 && n_max + 1 <= kDensityOrderCap) {
        for (const Partition& eta : enumerate_partitions(n_max + 1))
            worst = std::max(worst, 1.0 / ewens_pitman(eta, p));
    } else if (remaining > 0.0) {
        worst = std::numeric_limits<double>::infinity();
    }
    out.tail_estimate = remaining * worst;
    out.tail_is_loose = true;
    return out;
}

DensityEval density_spectral(const Frequencies& x, const Frequencies& y, double t, const Params& p, int m_max) {
    if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("density_spectral: t must be positive");
    if (m_max < 1) throw DomainError("density_spectral: m_max must be at least 1");
    check_order(m_max, "density_spectral");
    const auto kernels = kernel_p_all(x, y, m_max, p);
    DensityEval out;
    out.form = DensityForm::Spectral;
    out.truncation_order = m_max;
    long double value = 1.0L;
    long double last = 0.0L;
    for (int m = 2; m <= m_max; ++m) {
        last = spectral_rate(m, p.theta, t) * combine_q_m<long double>(m, p.theta, kernels);
        value += last;
    }
    out.value = static_cast<double>(value);
    // Geometric extrapolation of the last retained term.
    const double ratio = spectral_rate(m_max + 1, p.theta, t) / spectral_rate(m_max, p.theta, t);
    out.tail_estimate = ratio < 1.0 ? std::fabs(static_cast<double>(last)) * ratio / (1.0 - ratio)
                                    : std::numeric_limits<double>::infinity();
    out.tail_is_loose = true;
    return out;
}

LazyFrequencies sample_transition(const Frequencies& x, double t, const Params& p, Rng& rng) {
    p.validate();
    const int w = sample_block_count_from_infinity(p.theta, t, rng);
    if (w == 1) return stick_breaking_sampler(p, rng);
    return transition_from_configuration(sample_configuration(x, w, rng), p, rng);
}

LazyFrequencies sample_transition(LazyFrequencies& x, double t, const Params& p, Rng& rng) {
    p.validate();
    const int w = sample_block_count_from_infinity(p.theta, t, rng);
    if (w == 1) return stick_breaking_sampler(p, rng);
    return transition_from_configuration(sample_configuration(x, w, rng), p, rng);
}

double duality_expectation(const Partition& eta, const Frequencies& x, double t, const Params& p) {
    p.validate();
    if (eta.empty()) throw DomainError("duality_expectation: eta must be non-empty");
    if (!(t > 0.0)) throw DomainError("duality_expectation: t must be positive");
    const int n = eta.size();
    const DeathProbTable table = death_prob_table(n, p.theta, t);
    long double inner = table.absorbed();
    for (int w = 2; w <= n; ++w) {
        const auto it = table.values.find(w);
        const double d = it == table.values.end() ? 0.0 : it->second;
        if (d == 0.0) continue;
        long double s = 0.0L;
        for (const Partition& omega : enumerate_partitions(w)) {
            if (!is_subpartition(omega, eta)) continue;
            s += to_double(hypergeom(omega, eta)) * eval_augmented_monomial_direct(omega, x) /
                 mean_augmented_monomial(omega, p);
        }
        inner += static_cast<long double>(d) * s;
    }
    return static_cast<double>(mean_augmented_monomial(eta, p) * inner);
}

std::vector<MCReport> verify_duality(const std::vector<Partition>& etas, const Frequencies& x, double t,
                                     const Params& p, const McConfig& cfg) {
    p.validate();
    const int order = max_size(etas);
    std::vector<RunningStats> init(etas.size());
    auto stats = run_sharded(
        cfg, init,
        [&](Rng& rng, std::vector<RunningStats>& acc) {
            LazyFrequencies sample = sample_transition(x, t, p, rng);
            sample.realize_until(cfg.tail_tolerance);
            const PowerSums sums = sample.power_sums(order);
            for (std::size_t i = 0; i < etas.size(); ++i) acc[i].add(sums.augmented_monomial(etas[i]));
        },
        [](std::vector<RunningStats>& into, const std::vector<RunningStats>& from) { into = merge_all(into, from); });
    std::vector<MCReport> out;
    for (std::size_t i = 0; i < etas.size(); ++i)
        out.push_back(make_mc_report(duality_expectation(etas[i], x, t, p), stats[i], cfg.z_threshold,
                                     "duality " + to_string(etas[i])));
    return out;
}

MCReport verify_duality(const Partition& eta, const Frequencies& x, double t, const Params& p, const McConfig& cfg) {
    return verify_duality(std::vector<Partition>{eta}, x, t, p, cfg).front();
}

std::vector<MCReport> verify_stationarity(const std::vector<Partition>& etas, double t, const Params& p,
                                          const McConfig& cfg) {
    p.validate();
    const int order = max_size(etas);
    std::vector<RunningStats> init(etas.size());
    auto stats = run_sharded(
        cfg, init,
        [&](Rng& rng, std::vector<RunningStats>& acc) {
            LazyFrequencies start = stick_breaking_sampler(p, rng);
            LazyFrequencies sample = sample_transition(start, t, p, rng);
            sample.realize_until(cfg.tail_tolerance);
            const PowerSums sums = sample.power_sums(order);
            for (std::size_t i = 0; i < etas.size(); ++i) acc[i].add(sums.augmented_monomial(etas[i]));
        },
        [](std::vector<RunningStats>& into, const std::vector<RunningStats>& from) { into = merge_all(into, from); });
    std::vector<MCReport> out;
    for (std::size_t i = 0; i < etas.size(); ++i)
        out.push_back(make_mc_report(mean_augmented_monomial(etas[i], p), stats[i], cfg.z_threshold,
                                     "stationarity " + to_string(etas[i])));
    return out;
}

namespace {

double phi2(const std::vector<std::int64_t>& counts, std::int64_t n) {
    long double s = 0.0L;
    for (std::int64_t c : counts) s += static_cast<long double>(c) * c;
    return static_cast<double>(s / (static_cast<long double>(n) * n));
}

struct RepresentationAcc {
    RunningStats phi;
    RunningStats largest;
    std::vector<std::vector<double>> discrepancies;  // per grid size
};

double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    const double upper = v[mid];
    if (v.size() % 2 == 1) return upper;
    return 0.5 * (upper + *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid)));
}

}  // namespace

RepresentationReport empirical_representation_check(int n_max, const Params& p, const McConfig& cfg) {
    p.validate();
    if (n_max < 1) throw DomainError("empirical_representation_check: n_max must be at least 1");
    std::vector<int> grid;
    for (long long n = 10; n < n_max; n *= 10) grid.push_back(static_cast<int>(n));
    grid.push_back(n_max);

    RepresentationAcc init;
    init.discrepancies.resize(grid.size());
    auto acc = run_sharded(
        cfg, init,
        [&](Rng& rng, RepresentationAcc& a) {
            // The urn itself, for the moment and the largest part.
            const Partition urn = polya_urn_extend(Partition{}, n_max, p, rng);
            std::vector<std::int64_t> counts(urn.begin(), urn.end());
            a.phi.add(phi2(counts, n_max));
            a.largest.add(static_cast<double>(urn[0]) / n_max);
            // Paintbox coupling: i.i.d. draws from Z ~ PD(alpha, theta).
            LazyFrequencies z = stick_breaking_sampler(p, rng);
            std::vector<std::int64_t> colour_counts;
            long double sq = 0.0L;
            std::size_t next = 0;
            for (int n = 1; n <= n_max; ++n) {
                const std::size_t c = z.draw(rng);
                if (c >= colour_counts.size()) colour_counts.resize(c + 1, 0);
                sq += 2.0L * colour_counts[c] + 1.0L;  // (k+1)^2 - k^2
                ++colour_counts[c];
                if (next < grid.size() && n == grid[next]) {
                    a.discrepancies[next].push_back(static_cast<double>(sq / (static_cast<long double>(n) * n)));
                    ++next;
                }
            }
            z.realize_until(cfg.tail_tolerance);
            const double limit_phi = z.power_sums(2)[2];
            for (auto& d : a.discrepancies) d.back() = std::fabs(d.back() - limit_phi);
        },
        [](RepresentationAcc& into, const RepresentationAcc& from) {
            into.phi.merge(from.phi);
            into.largest.merge(from.largest);
            for (std::size_t i = 0; i < into.discrepancies.size(); ++i)
                into.discrepancies[i].insert(into.discrepancies[i].end(), from.discrepancies[i].begin(),
                                             from.discrepancies[i].end());
        });

    RepresentationReport out;
    out.limit_moment = (1.0 - p.alpha) / (1.0 + p.theta);
    const double n = n_max;
    const double exact = 1.0 / n + (n - 1.0) / n * out.limit_moment;
    out.moment = make_mc_report(exact, acc.phi, cfg.z_threshold, "representation phi2");
    out.mean_largest_part = acc.largest.mean();
    out.n_grid = grid;
    for (auto& d : acc.discrepancies) out.median_discrepancy.push_back(median(d));
    out.monotone = true;
    for (std::size_t i = 1; i < out.median_discrepancy.size(); ++i)
        if (!(out.median_discrepancy[i] < out.median_discrepancy[i - 1])) out.monotone = false;
    out.pass = out.moment.pass && out.monotone;
    return out;
}

std::map<std::pair<Partition, Partition>, double> split_urn_joint_law(int n, double t, const Params& p) {
    p.validate();
    if (n < 1) throw DomainError("split_urn_joint_law: n must be at least 1");
    if (n > 6) throw ResourceLimit("split_urn_joint_law: n above 6");
    const auto cells = enumerate_partitions(n);
    std::map<std::pair<Partition, Partition>, double> law;
    for (const auto& a : cells)
        for (const auto& b : cells) law[{a, b}] = 0.0;
    double mass = 0.0;
    for (int w = 1; w <= n; ++w) {
        const double d = w == 1 ? absorb_prob(p.theta, t) : death_prob_infinite(w, p.theta, t);
        mass += d;
        if (d == 0.0) continue;
        for (const Partition& omega : enumerate_partitions(w)) {
            const double m = ewens_pitman(omega, p);
            for (const auto& a : cells) {
                const double pa = conditional_partition_prob(a, omega, p);
                if (pa == 0.0) continue;
                for (const auto& b : cells) law[{a, b}] += d * m * pa * conditional_partition_prob(b, omega, p);
            }
        }
    }
    if (!(mass > 0.0)) throw NumericalError("split_urn_joint_law: P(D_t <= n) vanished");
    for (auto& [key, v] : law) v /= mass;
    return law;
}

ChiSquareReport verify_split_urn(int n, double t, const Params& p, const McConfig& cfg) {
    const auto law = split_urn_joint_law(n, t, p);
    std::map<std::pair<Partition, Partition>, std::size_t> index;
    std::vector<double> probs;
    for (const auto& [key, v] : law) {
        index[key] = probs.size();
        probs.push_back(v);
    }
    struct Acc {
        std::vector<std::int64_t> counts;
        std::int64_t excluded = 0;
    };
    Acc init{std::vector<std::int64_t>(probs.size(), 0), 0};
    auto acc = run_sharded(
        cfg, init,
        [&](Rng& rng, Acc& a) {
            const SplitUrnDraw draw = split_urn(n, t, p, rng);
            if (!draw.defined) {
                ++a.excluded;
                return;
            }
            ++a.counts[index.at({draw.first, draw.second})];
        },
        [](Acc& into, const Acc& from) {
            for (std::size_t i = 0; i < into.counts.size(); ++i) into.counts[i] += from.counts[i];
            into.excluded += from.excluded;
        });
    ChiSquareReport out;
    out.what = "split-urn";
    out.excluded = acc.excluded;
    out.trials = cfg.trials - acc.excluded;
    out.chi = chi_square_test(acc.counts, probs, cfg.p_floor);
    std::size_t i = 0;
    for (const auto& [key, v] : law) {
        out.cells.push_back({to_string(key.first) + "|" + to_string(key.second), acc.counts[i],
                             v * static_cast<double>(out.trials)});
        ++i;
    }
    return out;
}

ChiSquareReport verify_urn_conditional(const Partition& omega, int n, const Params& p, const McConfig& cfg) {
    p.validate();
    if (n < omega.size()) throw DomainError("verify_urn_conditional: n below |omega|");
    const auto cells = enumerate_partitions(n);
    std::vector<double> probs;
    std::map<Partition, std::size_t> index;
    for (const auto& eta : cells) {
        index[eta] = probs.size();
        probs.push_back(conditional_partition_prob(eta, omega, p));
    }
    const std::vector<std::int64_t> init(probs.size(), 0);
    auto counts = run_sharded(
        cfg, init,
        [&](Rng& rng, std::vector<std::int64_t>& acc) {
            ++acc[index.at(polya_urn_extend(omega, n - omega.size(), p, rng))];
        },
        [](std::vector<std::int64_t>& into, const std::vector<std::int64_t>& from) {
            for (std::size_t i = 0; i < into.size(); ++i) into[i] += from[i];
        });
    ChiSquareReport out;
    out.what = "urn-conditional";
    out.trials = cfg.trials;
    out.chi = chi_square_test(counts, probs, cfg.p_floor);
    for (std::size_t i = 0; i < cells.size(); ++i)
        out.cells.push_back({to_string(cells[i]), counts[i], probs[i] * static_cast<double>(cfg.trials)});
    return out;
}

TwoSampleReport verify_radon_nikodym(const Partition& omega, const Partition& gamma, const Params& p,
                                     const McConfig& cfg) {
    p.validate();
    if (omega.empty()) throw DomainError("verify_radon_nikodym: omega must be non-empty");
    const int order = std::max(omega.size(), gamma.size());
    const double m_omega = ewens_pitman(omega, p);
    const double prefactor = to_double(sampling_prefactor(omega));
    struct Acc {
        RunningStats reweighted;
        RunningStats direct;
    };
    auto acc = run_sharded(
        cfg, Acc{},
        [&](Rng& rng, Acc& a) {
            LazyFrequencies y = stick_breaking_sampler(p, rng);
            y.realize_until(cfg.tail_tolerance);
            const PowerSums ys = y.power_sums(order);
            a.reweighted.add(prefactor * ys.augmented_monomial(omega) / m_omega * ys.augmented_monomial(gamma));
            LazyFrequencies z = sample_pd_conditional(omega, p, rng);
            z.realize_until(cfg.tail_tolerance);
            const PowerSums zs = z.power_sums(order);
            a.direct.add(zs.augmented_monomial(gamma));
        },
        [](Acc& into, const Acc& from) {
            into.reweighted.merge(from.reweighted);
            into.direct.merge(from.direct);
        });
    TwoSampleReport out;
    const std::string tag = to_string(omega) + " " + to_string(gamma);
    out.reweighted = make_mc_report(acc.direct.mean(), acc.reweighted, cfg.z_threshold, "reweighted " + tag);
    out.direct = make_mc_report(acc.reweighted.mean(), acc.direct, cfg.z_threshold, "direct " + tag);
    const double se = std::hypot(acc.reweighted.std_error(), acc.direct.std_error());
    const double diff = acc.reweighted.mean() - acc.direct.mean();
    out.z_score = se > 0.0 ? diff / se : (std::fabs(diff) <= 1e-12 ? 0.0 : std::numeric_limits<double>::infinity());
    out.pass = std::fabs(out.z_score) <= cfg.z_threshold;
    return out;
}

}  // namespace pdd
