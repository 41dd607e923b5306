#include "pdd/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "pdd/lru_cache.hpp"

namespace pdd {

Rational sampling_prefactor(const Partition& eta) {
    return Rational(dim_partition(eta), multiplicity_factorial(eta));
}

template <class T>
T mean_augmented_monomial(const Partition& eta, const BasicParams<T>& p) {
    p.validate();
    if (eta.empty()) return T(1);
    // prod_{l=0}^{d-1}(theta + l alpha) / theta_(n) with the common factor theta
    // cancelled, so theta = 0 (allowed when alpha > 0) needs no special case.
    T num(1);
    for (int l = 1; l < eta.length(); ++l) num *= p.theta + T(l) * p.alpha;
    for (int part : eta) num *= rising<T>(T(1) - p.alpha, part - 1);
    return num / rising<T>(p.theta + T(1), eta.size() - 1);
}

template <class T>
T ewens_pitman(const Partition& eta, const BasicParams<T>& p) {
    if (eta.empty()) throw DomainError("ewens_pitman: |eta| must be at least 1");
    return from_rational<T>(sampling_prefactor(eta)) * mean_augmented_monomial(eta, p);
}

namespace {

LruCache<Partition, SingletonFreeExpansion, PartitionHash>& expansion_cache() {
    static LruCache<Partition, SingletonFreeExpansion, PartitionHash> cache(4096);
    return cache;
}

void add_scaled(SingletonFreeExpansion& into, const SingletonFreeExpansion& from, const BigInt& scale) {
    for (const auto& [mu, c] : from) {
        BigInt& slot = into[mu];
        slot += scale * c;
        if (slot == 0) into.erase(mu);
    }
}

}  // namespace

SingletonFreeExpansion eliminate_singletons(const Partition& eta) {
    if (eta.multiplicity(1) == 0) return {{eta, BigInt(1)}};
    if (auto hit = expansion_cache().get(eta)) return *hit;

    const Partition reduced = eta.remove_one(1);
    SingletonFreeExpansion out = eliminate_singletons(reduced);
    for (int v : reduced.distinct_parts())
        add_scaled(out, eliminate_singletons(reduced.add_one(v)), BigInt(-reduced.multiplicity(v)));
    expansion_cache().put(eta, out);
    return out;
}

double monomial_symmetric(const Partition& mu, std::span<const double> atoms) {
    if (mu.empty()) return 1.0;
    if (static_cast<std::size_t>(mu.length()) > atoms.size()) return 0.0;

    // DP over atoms; the state is how many parts of each distinct value are
    // still unassigned, in mixed radix.
    const std::vector<int> values = mu.distinct_parts();
    std::vector<int> counts, stride;
    int states = 1;
    for (int v : values) {
        counts.push_back(mu.multiplicity(v));
        stride.push_back(states);
        states *= counts.back() + 1;
    }
    std::vector<double> dp(static_cast<std::size_t>(states), 0.0), next;
    dp[static_cast<std::size_t>(states - 1)] = 1.0;  // everything unassigned
    std::vector<double> powers(values.size());
    for (double a : atoms) {
        if (a == 0.0) continue;
        for (std::size_t j = 0; j < values.size(); ++j) powers[j] = std::pow(a, values[j]);
        next = dp;
        for (int s = 0; s < states; ++s) {
            double w = dp[static_cast<std::size_t>(s)];
            if (w == 0.0) continue;
            for (std::size_t j = 0; j < values.size(); ++j) {
                int left = (s / stride[j]) % (counts[j] + 1);
                if (left > 0) next[static_cast<std::size_t>(s - stride[j])] += w * powers[j];
            }
        }
        dp.swap(next);
    }
    return dp[0];
}

namespace {

double augmented_on_atoms(const Partition& mu, std::span<const double> atoms) {
    if (mu.empty()) return 1.0;
    return monomial_symmetric(mu, atoms) * to_double(Rational(multiplicity_factorial(mu)));
}

}  // namespace

double eval_augmented_monomial(const Partition& eta, const Frequencies& x) {
    double total = 0.0;
    for (const auto& [mu, c] : eliminate_singletons(eta))
        total += c.convert_to<double>() * augmented_on_atoms(mu, x.atoms());
    return total;
}

namespace {

// Continuous extension of m_eta: j singletons may land in the dust, which
// contributes r^j / j! in the limit of infinitely fine atoms.
double monomial_with_dust(const Partition& eta, const Frequencies& x) {
    const int singletons = eta.multiplicity(1);
    const double r = x.residual();
    double m = 0.0;
    double dust_weight = 1.0;
    Partition core = eta;
    for (int j = 0; j <= singletons; ++j) {
        if (j > 0) {
            dust_weight *= r / j;
            core = core.remove_one(1);
        }
        if (dust_weight == 0.0) break;
        m += dust_weight * monomial_symmetric(core, x.atoms());
    }
    return m;
}

}  // namespace

double eval_augmented_monomial_direct(const Partition& eta, const Frequencies& x) {
    return monomial_with_dust(eta, x) * to_double(Rational(multiplicity_factorial(eta)));
}

double eval_sampling_prob(const Partition& eta, const Frequencies& x) {
    return to_double(sampling_prefactor(eta)) * eval_augmented_monomial(eta, x);
}

double eval_sampling_prob_direct(const Partition& eta, const Frequencies& x) {
    return to_double(Rational(dim_partition(eta))) * monomial_with_dust(eta, x);
}

template <class T>
ConsistencyReport<T> check_consistency(int n, const BasicParams<T>& p) {
    if (n < 2) throw DomainError("check_consistency: n must be at least 2");
    p.validate();
    ConsistencyReport<T> report;
    report.n = n;
    std::map<Partition, T> lower;
    for (const Partition& omega : enumerate_partitions(n - 1)) lower.emplace(omega, T(0));
    for (const Partition& eta : enumerate_partitions(n)) {
        const T m_eta = ewens_pitman(eta, p);
        for (const auto& [omega, prob] : down_step_distribution(eta))
            lower.at(omega) += from_rational<T>(prob) * m_eta;
    }
    for (const auto& [omega, value] : lower) {
        T diff = value - ewens_pitman(omega, p);
        if (diff < T(0)) diff = -diff;
        if (report.max_discrepancy < diff) report.max_discrepancy = diff;
        ++report.relations;
    }
    return report;
}

template <class T>
std::map<Partition, T> up_step_distribution(const Partition& eta, const BasicParams<T>& p) {
    if (eta.empty()) throw DomainError("up_step_distribution: |eta| must be at least 1");
    const T m_eta = ewens_pitman(eta, p);
    if (m_eta == T(0)) throw DomainError("up_step_distribution: M_n(eta) vanishes");
    std::map<Partition, T> out;
    for (const auto& [lambda, weight] : covering(eta)) {
        const Rational down = down_step_distribution(lambda).at(eta);
        out.emplace(lambda, ewens_pitman(lambda, p) / m_eta * from_rational<T>(down));
    }
    return out;
}

template <class T>
T updown_kernel(const Partition& eta, const Partition& eta_tilde, const BasicParams<T>& p) {
    if (eta.size() != eta_tilde.size()) throw DomainError("updown_kernel: sizes differ");
    T total(0);
    for (const auto& [lambda, up] : up_step_distribution(eta, p)) {
        const auto down = down_step_distribution(lambda);
        if (auto it = down.find(eta_tilde); it != down.end()) total += up * from_rational<T>(it->second);
    }
    return total;
}

namespace {

// Moebius expansion of an augmented monomial: (coefficient, block sums) pairs.
using PowerSumExpansion = std::vector<std::pair<double, std::vector<int>>>;

void expand_set_partitions(const std::vector<int>& parts, std::size_t next, std::vector<int>& block_sums,
                           std::vector<int>& block_sizes, PowerSumExpansion& out) {
    if (next == parts.size()) {
        double coefficient = 1.0;
        for (int size : block_sizes)
            for (int i = 1; i < size; ++i) coefficient *= -static_cast<double>(i);
        out.emplace_back(coefficient, block_sums);
        return;
    }
    for (std::size_t b = 0; b < block_sums.size(); ++b) {
        block_sums[b] += parts[next];
        ++block_sizes[b];
        expand_set_partitions(parts, next + 1, block_sums, block_sizes, out);
        block_sums[b] -= parts[next];
        --block_sizes[b];
    }
    block_sums.push_back(parts[next]);
    block_sizes.push_back(1);
    expand_set_partitions(parts, next + 1, block_sums, block_sizes, out);
    block_sums.pop_back();
    block_sizes.pop_back();
}

std::shared_ptr<const PowerSumExpansion> power_sum_expansion(const Partition& eta) {
    static LruCache<Partition, std::shared_ptr<const PowerSumExpansion>, PartitionHash> cache(4096);
    if (auto hit = cache.get(eta)) return *hit;
    if (eta.length() > 10) throw ResourceLimit("PowerSums: partition too long for the set-partition expansion");
    auto out = std::make_shared<PowerSumExpansion>();
    std::vector<int> sums, sizes;
    expand_set_partitions(eta.parts(), 0, sums, sizes, *out);
    cache.put(eta, out);
    return out;
}

}  // namespace

PowerSums::PowerSums(const Frequencies& x, int max_order) {
    if (max_order < 0) throw DomainError("PowerSums: negative order");
    sums_.assign(static_cast<std::size_t>(max_order) + 1, 0.0);
    sums_[0] = 1.0;
    if (max_order >= 1) sums_[1] = 1.0;
    for (double a : x.atoms()) {
        double power = a;
        for (int k = 2; k <= max_order; ++k) {
            power *= a;
            sums_[static_cast<std::size_t>(k)] += power;
        }
    }
}

PowerSums::PowerSums(std::vector<double> sums) : sums_(std::move(sums)) {
    if (sums_.empty()) throw DomainError("PowerSums: empty");
}

double PowerSums::augmented_monomial(const Partition& eta) const {
    if (eta.size() > max_order()) throw DomainError("PowerSums: partition exceeds the precomputed order");
    double total = 0.0;
    for (const auto& [coefficient, blocks] : *power_sum_expansion(eta)) {
        double term = coefficient;
        for (int s : blocks) term *= sums_[static_cast<std::size_t>(s)];
        total += term;
    }
    return total;
}

double PowerSums::sampling_prob(const Partition& eta) const {
    return to_double(sampling_prefactor(eta)) * augmented_monomial(eta);
}

template double mean_augmented_monomial(const Partition&, const BasicParams<double>&);
template Rational mean_augmented_monomial(const Partition&, const BasicParams<Rational>&);
template double ewens_pitman(const Partition&, const BasicParams<double>&);
template Rational ewens_pitman(const Partition&, const BasicParams<Rational>&);
template ConsistencyReport<double> check_consistency(int, const BasicParams<double>&);
template ConsistencyReport<Rational> check_consistency(int, const BasicParams<Rational>&);
template std::map<Partition, double> up_step_distribution(const Partition&, const BasicParams<double>&);
template std::map<Partition, Rational> up_step_distribution(const Partition&, const BasicParams<Rational>&);
template double updown_kernel(const Partition&, const Partition&, const BasicParams<double>&);
template Rational updown_kernel(const Partition&, const Partition&, const BasicParams<Rational>&);

}  // namespace pdd
