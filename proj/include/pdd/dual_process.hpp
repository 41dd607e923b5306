#pragma once
// The block-counting death process, the partition-valued dual D_t and the
// generator algebra on augmented monomials.
//
// Index convention: d_{nl}(t) is the probability that a process started with
// n blocks has l blocks at time t (first index = starting count).
//
// For -1 < theta < 0 the labelled probabilities d_{n1} and d_{n0} are not
// separately probabilities; only their sum, the collapsed absorbing mass
// d~_{n1} = d_{n1} + d_{n0}, is. Tables therefore store d~_{n1} at l = 1 and
// nothing at l = 0 in that regime (see DeathProbTable::collapsed).

#include <map>
#include <memory>
#include <optional>
#include <vector>

#include "pdd/params.hpp"
#include "pdd/partition.hpp"
#include "pdd/random.hpp"

namespace pdd {

// Maps a raw series value to [0, 1]: values within 1e-9 of the interval are
// snapped onto it, anything further out raises NumericalError.
double clamp_probability(double raw, const char* what);

// d_{nl}(t), 0 <= l <= n; l = 0 and l = 1 require theta >= 0.
double death_prob_finite(int n, int l, double theta, double t);
// d~_{n1}(t) = d_{n1}(t) + d_{n0}(t), valid for every theta > -1.
double absorbed_prob_finite(int n, double theta, double t);
// d_l(t) from the entrance boundary at infinity, l >= 1 (l = 1 needs theta >= 0).
double death_prob_infinite(int l, double theta, double t);
// d~_1(t) = 1 - sum_{n >= 2} d_n(t), evaluated from its own closed series.
double absorb_prob(double theta, double t);

struct DeathProbTable {
    double theta = 0.0;
    double t = 0.0;
    std::optional<int> n;               // empty: start from infinity
    bool collapsed = false;             // l = 1 holds d~ (theta < 0 or infinite start)
    std::map<int, double> values;       // l -> probability
    std::map<int, int> precision_bits;  // l -> bits of working precision used
    int precision_used() const;
    double absorbed() const;  // d~_{n1}: values[1] (+ values[0] when present)
    double total() const;
};

DeathProbTable death_prob_table(int n, double theta, double t);
// Rows l = 1 (collapsed), 2, 3, ... until the cumulative mass reaches 1 - mass_tol.
DeathProbTable death_prob_table_infinite(double theta, double t, double mass_tol = 1e-12);

// q_{eta omega}(t) = H(omega | eta) d_{|eta| |omega|}(t); omega = (1) receives
// the collapsed absorbing mass. Zero when omega is not contained in eta.
double dual_transition(const Partition& eta, const Partition& omega, double theta, double t);

struct DeathPath {
    std::vector<double> jump_times;
    std::vector<Partition> states;  // states.size() == jump_times.size() + 1
};

DeathPath simulate_death_path(const Partition& eta0, double theta, double t_end, Rng& rng);
// Final state only; cheaper for large Monte Carlo runs.
Partition simulate_death_state(const Partition& eta0, double theta, double t, Rng& rng);
// Block count of the chain above: it stops at one block, so it follows the
// collapsed law (d_{n1} + d_{n0} at l = 1).
int simulate_block_count(int n0, double theta, double t, Rng& rng);

// Inverse-CDF sampler of |D_t| started from infinity.
class BlockCountSampler {
public:
    BlockCountSampler(double theta, double t);
    int operator()(Rng& rng) const;
    double probability(int w) const;  // 0 beyond the table
    int max_count() const { return static_cast<int>(cdf_.size()); }
    double mean() const;
    const DeathProbTable& table() const { return table_; }

private:
    DeathProbTable table_;
    std::vector<double> cdf_;  // cdf_[w - 1] = P(|D_t| <= w)
};

// Shared, memoised sampler for (theta, t).
std::shared_ptr<const BlockCountSampler> block_count_sampler(double theta, double t);

// Below this time the exact table needs thousands of rows, each at several
// hundred digits, so |D_t| is drawn from the holding times instead.
inline constexpr double kSmallTimeThreshold = 0.01;

// |D_t| from infinity via holding times: D_t = min{l : T_l <= t} with
// T_l = sum_{k > l} Exp(k(k + theta - 1)/2). Holding times below L = 10/t are
// drawn exactly; T_L (mean about t/5, standard deviation about (t/10)^1.5) is
// drawn from the normal law with its exact mean and variance. The error is the
// shape error of that normal approximation (skewness about L^(-1/2)) acting
// on a quantity an order of magnitude narrower than the spread of T_l near
// l = 2/t.
class SmallTimeBlockCountSampler {
public:
    SmallTimeBlockCountSampler(double theta, double t);
    int operator()(Rng& rng) const;
    int cutoff() const { return cutoff_; }

private:
    double theta_, t_;
    int cutoff_;
    double tail_mean_ = 0.0, tail_sd_ = 0.0;
};

// Exact table for t >= kSmallTimeThreshold, holding-time sampler below.
int sample_block_count_from_infinity(double theta, double t, Rng& rng);

// Finite linear combination over a partition-indexed basis.
template <class T>
struct CoefficientMap {
    std::map<Partition, T> terms;

    void add(const Partition& key, const T& value) {
        T& slot = terms[key];
        slot += value;
        if (slot == T(0)) terms.erase(key);
    }
    T coefficient(const Partition& key) const {
        auto it = terms.find(key);
        return it == terms.end() ? T(0) : it->second;
    }
    T sum() const {
        T s(0);
        for (const auto& [k, v] : terms) s += v;
        return s;
    }
    bool operator==(const CoefficientMap&) const = default;
};

// L_{alpha,theta} P~_eta in the P~ basis from the closed form: -n(n+theta-1)/2
// on eta, eta_i(eta_i-1-alpha)/2 on eta - e_i for eta_i > 1 and
// (theta + (d-1) alpha)/2 per singleton deletion. The constant is written as (1).
template <class T>
CoefficientMap<T> generator_coefficients(const Partition& eta, const BasicParams<T>& p);

// The same action computed independently: eliminate singletons from P~_eta,
// differentiate each singleton-free P~_mu directly, and express the result in
// the singleton-free basis (the empty partition is the constant).
CoefficientMap<Rational> generator_coefficients_by_elimination(const Partition& eta, const ExactParams& p);

// Re-expresses a combination of P~ functions in the singleton-free basis, in
// which the representation is unique.
CoefficientMap<Rational> to_singleton_free(const CoefficientMap<Rational>& m);

// A_theta g_eta in the g basis: -lambda_n on eta, lambda_n p_down(eta, omega) on
// each covered omega, lambda_n = n(n+theta-1)/2.
template <class T>
CoefficientMap<T> dual_generator_coefficients(const Partition& eta, const BasicParams<T>& p);

struct GeneratorDualityCheck {
    CoefficientMap<Rational> lhs;  // L g_eta, singleton-free P~ basis
    CoefficientMap<Rational> rhs;  // A_theta g_eta rewritten via g = P~ / E[P~]
    bool holds = false;
};
GeneratorDualityCheck check_generator_duality(const Partition& eta, const ExactParams& p);

}  // namespace pdd
