#include "pdd/dual_process.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <string>

#include "pdd/death_series.hpp"
#include "pdd/errors.hpp"
#include "pdd/lru_cache.hpp"
#include "pdd/sampling.hpp"

namespace pdd {

namespace {

constexpr double kClampSlack = 1e-9;

void require_theta(double theta) {
    if (!(theta > -1.0) || !std::isfinite(theta)) throw DomainError("theta must exceed -1");
}

SeriesResult labelled(std::optional<int> n, int l, double theta, double t) {
    return evaluate_death_series({SeriesKind::Labelled, n, l, theta, t});
}

}  // namespace

double clamp_probability(double raw, const char* what) {
    if (raw < -kClampSlack || raw > 1.0 + kClampSlack || !std::isfinite(raw))
        throw NumericalError(std::string(what) + ": value " + std::to_string(raw) + " lies outside [0, 1]");
    return std::clamp(raw, 0.0, 1.0);
}

double death_prob_finite(int n, int l, double theta, double t) {
    require_theta(theta);
    if (n < 1 || l < 0 || l > n) throw DomainError("death_prob_finite: need 0 <= l <= n and n >= 1");
    if (l <= 1 && theta < 0.0)
        throw DomainError("death_prob_finite: d_{n0} and d_{n1} are not probabilities for theta < 0; "
                          "use absorbed_prob_finite");
    if (l == 0) return clamp_probability(evaluate_death_series({SeriesKind::Zero, n, 0, theta, t}).value, "d_n0");
    return clamp_probability(labelled(n, l, theta, t).value, "d_nl");
}

double absorbed_prob_finite(int n, double theta, double t) {
    require_theta(theta);
    if (n < 1) throw DomainError("absorbed_prob_finite: n must be at least 1");
    return clamp_probability(evaluate_death_series({SeriesKind::Absorbed, n, 0, theta, t}).value, "d~_n1");
}

double death_prob_infinite(int l, double theta, double t) {
    require_theta(theta);
    if (l < 1) throw DomainError("death_prob_infinite: l must be at least 1");
    if (l == 1 && theta < 0.0)
        throw DomainError("death_prob_infinite: d_1 is not a probability for theta < 0; use absorb_prob");
    return clamp_probability(labelled(std::nullopt, l, theta, t).value, "d_l");
}

double absorb_prob(double theta, double t) {
    require_theta(theta);
    return clamp_probability(evaluate_death_series({SeriesKind::Absorbed, std::nullopt, 0, theta, t}).value,
                             "d~_1");
}

int DeathProbTable::precision_used() const {
    int bits = 0;
    for (const auto& [l, b] : precision_bits) bits = std::max(bits, b);
    return bits;
}

double DeathProbTable::absorbed() const {
    double a = 0.0;
    if (auto it = values.find(1); it != values.end()) a += it->second;
    if (auto it = values.find(0); it != values.end()) a += it->second;
    return a;
}

double DeathProbTable::total() const {
    double s = 0.0;
    for (const auto& [l, v] : values) s += v;
    return s;
}

DeathProbTable death_prob_table(int n, double theta, double t) {
    require_theta(theta);
    if (n < 1) throw DomainError("death_prob_table: n must be at least 1");
    DeathProbTable table;
    table.theta = theta;
    table.t = t;
    table.n = n;
    table.collapsed = theta < 0.0;
    auto store = [&](int l, const SeriesResult& r, const char* what) {
        table.values[l] = clamp_probability(r.value, what);
        table.precision_bits[l] = r.precision_bits;
    };
    if (table.collapsed) {
        store(1, evaluate_death_series({SeriesKind::Absorbed, n, 0, theta, t}), "d~_n1");
    } else {
        store(0, evaluate_death_series({SeriesKind::Zero, n, 0, theta, t}), "d_n0");
        store(1, labelled(n, 1, theta, t), "d_n1");
    }
    for (int l = 2; l <= n; ++l) store(l, labelled(n, l, theta, t), "d_nl");
    return table;
}

DeathProbTable death_prob_table_infinite(double theta, double t, double mass_tol) {
    require_theta(theta);
    DeathProbTable table;
    table.theta = theta;
    table.t = t;
    table.collapsed = true;
    const SeriesResult absorbed = evaluate_death_series({SeriesKind::Absorbed, std::nullopt, 0, theta, t});
    table.values[1] = clamp_probability(absorbed.value, "d~_1");
    table.precision_bits[1] = absorbed.precision_bits;
    double cumulative = table.values[1];
    double previous = 0.0;
    constexpr int kMaxRows = 1000000;
    for (int l = 2;; ++l) {
        if (l > kMaxRows) throw NumericalError("death_prob_table_infinite: mass did not accumulate");
        const SeriesResult r = labelled(std::nullopt, l, theta, t);
        const double v = clamp_probability(r.value, "d_l");
        table.values[l] = v;
        table.precision_bits[l] = r.precision_bits;
        cumulative += v;
        if (cumulative >= 1.0 - mass_tol) break;
        // past the mode and negligible: what is missing is rounding, not mass
        if (cumulative > 0.5 && v < previous && v < 1e-4 * mass_tol) break;
        previous = v;
    }
    return table;
}

double dual_transition(const Partition& eta, const Partition& omega, double theta, double t) {
    require_theta(theta);
    if (omega.size() < 1) throw DomainError("dual_transition: |omega| must be at least 1");
    if (!is_subpartition(omega, eta)) return 0.0;
    if (omega.size() == 1) return absorbed_prob_finite(eta.size(), theta, t);  // H((1) | eta) = 1
    return to_double(hypergeom(omega, eta)) * death_prob_finite(eta.size(), omega.size(), theta, t);
}

namespace {

double holding_rate(int n, double theta) { return n * (n + theta - 1.0) / 2.0; }

// Removes one ball chosen uniformly: part i is hit with probability eta_i / n.
Partition delete_uniform_ball(const Partition& eta, Rng& rng) {
    std::uniform_int_distribution<int> ball(0, eta.size() - 1);
    int b = ball(rng);
    for (int part : eta) {
        if (b < part) return eta.remove_one(part);
        b -= part;
    }
    return eta.remove_one(eta[0]);  // unreachable
}

}  // namespace

DeathPath simulate_death_path(const Partition& eta0, double theta, double t_end, Rng& rng) {
    require_theta(theta);
    if (eta0.size() < 1) throw DomainError("simulate_death_path: |eta0| must be at least 1");
    DeathPath path;
    path.states.push_back(eta0);
    double now = 0.0;
    while (path.states.back().size() > 1) {
        now += exponential(rng, holding_rate(path.states.back().size(), theta));
        if (now > t_end) break;
        path.jump_times.push_back(now);
        path.states.push_back(delete_uniform_ball(path.states.back(), rng));
    }
    return path;
}

Partition simulate_death_state(const Partition& eta0, double theta, double t, Rng& rng) {
    require_theta(theta);
    if (eta0.size() < 1) throw DomainError("simulate_death_state: |eta0| must be at least 1");
    Partition state = eta0;
    double now = 0.0;
    while (state.size() > 1) {
        now += exponential(rng, holding_rate(state.size(), theta));
        if (now > t) break;
        state = delete_uniform_ball(state, rng);
    }
    return state;
}

int simulate_block_count(int n0, double theta, double t, Rng& rng) {
    require_theta(theta);
    if (n0 < 1) throw DomainError("simulate_block_count: n0 must be at least 1");
    int n = n0;
    double now = 0.0;
    while (n > 1) {
        now += exponential(rng, holding_rate(n, theta));
        if (now > t) break;
        --n;
    }
    return n;
}

BlockCountSampler::BlockCountSampler(double theta, double t) : table_(death_prob_table_infinite(theta, t)) {
    double c = 0.0;
    for (const auto& [w, prob] : table_.values) {
        c += prob;
        cdf_.push_back(c);
    }
}

int BlockCountSampler::operator()(Rng& rng) const {
    // scale by the realised total so the truncated table is an exact law
    const double u = uniform01(rng) * cdf_.back();
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    if (it == cdf_.end()) --it;
    return static_cast<int>(it - cdf_.begin()) + 1;
}

double BlockCountSampler::probability(int w) const {
    auto it = table_.values.find(w);
    return it == table_.values.end() ? 0.0 : it->second;
}

double BlockCountSampler::mean() const {
    double m = 0.0;
    for (const auto& [w, prob] : table_.values) m += w * prob;
    return m;
}

namespace {

struct TimeKey {
    double theta, t;
    bool operator==(const TimeKey&) const = default;
};
struct TimeKeyHash {
    std::size_t operator()(const TimeKey& k) const {
        return std::hash<double>()(k.theta) * 31u ^ std::hash<double>()(k.t);
    }
};

}  // namespace

std::shared_ptr<const BlockCountSampler> block_count_sampler(double theta, double t) {
    static LruCache<TimeKey, std::shared_ptr<const BlockCountSampler>, TimeKeyHash> cache(64);
    const TimeKey key{theta, t};
    if (auto hit = cache.get(key)) return *hit;
    auto made = std::make_shared<const BlockCountSampler>(theta, t);
    cache.put(key, made);
    return made;
}

SmallTimeBlockCountSampler::SmallTimeBlockCountSampler(double theta, double t) : theta_(theta), t_(t) {
    if (!(theta > -1.0)) throw DomainError("block count sampler: theta must exceed -1");
    if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("block count sampler: t must be positive");
    const double cut = std::ceil(std::max(50.0, 10.0 / t));
    if (cut > 1e8) throw ResourceLimit("block count sampler: t too small");
    cutoff_ = static_cast<int>(cut);
    // Mean and variance of T_L: explicit sum up to 100 L, then the integral tail.
    const double far = 100.0 * cut;
    long double mean = 0.0L, var = 0.0L;
    for (double k = far; k > cut; k -= 1.0) {  // small terms first
        const long double inv = 2.0L / (static_cast<long double>(k) * (k + theta - 1.0));
        mean += inv;
        var += inv * inv;
    }
    const double shift = far + 0.5 + 0.5 * (theta - 1.0);
    mean += 2.0L / shift;
    var += 4.0L / (3.0L * shift * shift * shift);
    tail_mean_ = static_cast<double>(mean);
    tail_sd_ = static_cast<double>(std::sqrt(var));
}

int SmallTimeBlockCountSampler::operator()(Rng& rng) const {
    double total = tail_mean_ + tail_sd_ * standard_normal(rng);
    int l = cutoff_;
    if (total > t_) return l;  // more than L blocks: probability below 1e-100
    while (l > 1) {
        const double rate = 0.5 * l * (l + theta_ - 1.0);
        const double next = total + exponential(rng, rate);
        if (next > t_) break;
        total = next;
        --l;
    }
    return l;
}

namespace {

std::shared_ptr<const SmallTimeBlockCountSampler> small_time_sampler(double theta, double t) {
    static LruCache<TimeKey, std::shared_ptr<const SmallTimeBlockCountSampler>, TimeKeyHash> cache(64);
    const TimeKey key{theta, t};
    if (auto hit = cache.get(key)) return *hit;
    auto made = std::make_shared<const SmallTimeBlockCountSampler>(theta, t);
    cache.put(key, made);
    return made;
}

}  // namespace

int sample_block_count_from_infinity(double theta, double t, Rng& rng) {
    if (t < kSmallTimeThreshold) return (*small_time_sampler(theta, t))(rng);
    return (*block_count_sampler(theta, t))(rng);
}

template <class T>
CoefficientMap<T> generator_coefficients(const Partition& eta, const BasicParams<T>& p) {
    p.validate();
    if (eta.size() < 1) throw DomainError("generator_coefficients: |eta| must be at least 1");
    const T half = T(1) / T(2);
    const T n(eta.size());
    const T d(eta.length());
    const auto constant_if_empty = [](const Partition& q) { return q.empty() ? Partition{1} : q; };

    CoefficientMap<T> out;
    out.add(eta, -half * n * (n + p.theta - T(1)));
    for (int v : eta.distinct_parts()) {
        const T a(eta.multiplicity(v));
        const Partition lower = constant_if_empty(eta.remove_one(v));
        if (v > 1)
            out.add(lower, a * half * T(v) * (T(v) - T(1) - p.alpha));
        else
            out.add(lower, a * half * (p.theta + (d - T(1)) * p.alpha));
    }
    return out;
}

CoefficientMap<Rational> to_singleton_free(const CoefficientMap<Rational>& m) {
    CoefficientMap<Rational> out;
    for (const auto& [eta, c] : m.terms)
        for (const auto& [mu, k] : eliminate_singletons(eta)) out.add(mu, c * Rational(k));
    return out;
}

CoefficientMap<Rational> generator_coefficients_by_elimination(const Partition& eta, const ExactParams& p) {
    p.validate();
    if (eta.size() < 1) throw DomainError("generator_coefficients: |eta| must be at least 1");
    const Rational half = make_rational(1, 2);
    CoefficientMap<Rational> mixed;
    for (const auto& [mu, k] : eliminate_singletons(eta)) {
        if (mu.empty()) continue;  // the constant is annihilated
        const Rational c(k);
        const Rational n(mu.size());
        // second-order diagonal part, Euler term and drift on x^mu
        mixed.add(mu, -c * half * n * (n - 1));
        mixed.add(mu, -c * half * p.theta * n);
        for (int v : mu.distinct_parts()) {
            const Rational a(mu.multiplicity(v));
            const Partition lower = mu.remove_one(v);
            mixed.add(lower, c * a * half * v * (v - 1));
            mixed.add(lower, -c * a * half * p.alpha * v);
        }
    }
    return to_singleton_free(mixed);
}

template <class T>
CoefficientMap<T> dual_generator_coefficients(const Partition& eta, const BasicParams<T>& p) {
    p.validate();
    if (eta.size() < 2) throw DomainError("dual_generator_coefficients: |eta| must be at least 2");
    const T n(eta.size());
    const T lambda = n * (n + p.theta - T(1)) / T(2);
    CoefficientMap<T> out;
    out.add(eta, -lambda);
    for (const auto& [omega, prob] : down_step_distribution(eta)) out.add(omega, lambda * from_rational<T>(prob));
    return out;
}

GeneratorDualityCheck check_generator_duality(const Partition& eta, const ExactParams& p) {
    GeneratorDualityCheck check;
    const Rational mean_eta = mean_augmented_monomial(eta, p);
    CoefficientMap<Rational> lhs;
    for (const auto& [key, c] : generator_coefficients(eta, p).terms) lhs.add(key, c / mean_eta);
    check.lhs = to_singleton_free(lhs);

    CoefficientMap<Rational> rhs;
    for (const auto& [omega, c] : dual_generator_coefficients(eta, p).terms)
        rhs.add(omega, c / mean_augmented_monomial(omega, p));
    check.rhs = to_singleton_free(rhs);
    check.holds = check.lhs == check.rhs;
    return check;
}

template CoefficientMap<double> generator_coefficients(const Partition&, const BasicParams<double>&);
template CoefficientMap<Rational> generator_coefficients(const Partition&, const BasicParams<Rational>&);
template CoefficientMap<double> dual_generator_coefficients(const Partition&, const BasicParams<double>&);
template CoefficientMap<Rational> dual_generator_coefficients(const Partition&, const BasicParams<Rational>&);

}  // namespace pdd
