#pragma once
// Fixed-t transition law of the two-parameter Poisson-Dirichlet diffusion:
// the mixture sampler, truncated densities in spectral and mixture form, and
// the Monte Carlo verification harness.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "pdd/frequencies.hpp"
#include "pdd/parallel.hpp"
#include "pdd/params.hpp"
#include "pdd/partition.hpp"
#include "pdd/stats.hpp"
#include "pdd/urns.hpp"

namespace pdd {

// p_n(x, y) = sum_{|eta| = n} P->_eta(x) P->_eta(y) / E[P->_eta]; p_0 = 1.
double kernel_p_n(const Frequencies& x, const Frequencies& y, int n, const Params& p);

// (2m - 1 + theta) / m! * sum_{n=0}^{m} (-1)^{m-n} binom(m, n) (n + theta)_(m-1) p_n.
template <class T>
T combine_q_m(int m, const T& theta, const std::vector<T>& p_values);

double kernel_q_m(const Frequencies& x, const Frequencies& y, int m, const Params& p);

enum class DensityForm { Spectral, Mixture };

struct DensityEval {
    double value = 0.0;
    int truncation_order = 0;
    double tail_estimate = 0.0;  // engineering bound, see tail_is_loose
    bool tail_is_loose = true;
    DensityForm form = DensityForm::Mixture;
};

// d~_1(t) + sum_{n=2}^{n_max} d_n(t) p_n(x, y). The tail estimate is the
// remaining block-count mass times max_{|eta| = n_max + 1} 1 / E[P->_eta].
DensityEval density_mixture(const Frequencies& x, const Frequencies& y, double t, const Params& p, int n_max);

// 1 + sum_{m=2}^{m_max} exp(-m(m + theta - 1)t/2) q_m(x, y). The tail estimate
// extrapolates the last term geometrically.
DensityEval density_spectral(const Frequencies& x, const Frequencies& y, double t, const Params& p, int m_max);

// One draw of X_t given X_0 = x: w ~ |D_t| from infinity; w = 1 gives a fresh
// PD(alpha, theta), otherwise omega = configuration of w individuals drawn
// from x and X_t ~ PD(alpha, theta; omega).
LazyFrequencies sample_transition(const Frequencies& x, double t, const Params& p, Rng& rng);
LazyFrequencies sample_transition(LazyFrequencies& x, double t, const Params& p, Rng& rng);

// E_x[P~_eta(X_t)] from the dual: E[P~_eta] (d~_{n1} + sum_{w >= 2} d_{nw}
// sum_{omega in eta, |omega| = w} H(omega | eta) P~_omega(x) / E[P~_omega]).
double duality_expectation(const Partition& eta, const Frequencies& x, double t, const Params& p);

// MC estimate of E_x[P~_eta(X_t)] for each eta (one shared set of draws).
std::vector<MCReport> verify_duality(const std::vector<Partition>& etas, const Frequencies& x, double t,
                                     const Params& p, const McConfig& cfg);
MCReport verify_duality(const Partition& eta, const Frequencies& x, double t, const Params& p, const McConfig& cfg);

// Stationarity: with X_0 ~ PD(alpha, theta), E[P~_eta(X_t)] = E[P~_eta].
std::vector<MCReport> verify_stationarity(const std::vector<Partition>& etas, double t, const Params& p,
                                          const McConfig& cfg);

struct RepresentationReport {
    MCReport moment;                          // mean phi_2(D_n / n) at n_max vs its exact finite-n value
    double limit_moment = 0.0;                // E[P~_(2)] = (1 - alpha) / (1 + theta)
    double mean_largest_part = 0.0;           // mean of max_i D_n,i / n at n_max
    std::vector<int> n_grid;                  // sizes on the convergence trend
    std::vector<double> median_discrepancy;   // median |phi_2(D_n / n) - phi_2(Z)| per size
    bool monotone = false;
    bool pass = false;
};

// Urn from empty to size n_max, reps times. The moment check compares the mean
// of phi_2 = sum (D_i / n)^2 with its exact value 1/n + (n-1)/n (1-alpha)/(1+theta).
// The trend check couples the urn with its paintbox limit Z (the urn is i.i.d.
// sampling from Z ~ PD(alpha, theta)) and tracks the median of
// |phi_2(D_n / n) - phi_2(Z)| over a geometric grid of n up to n_max.
RepresentationReport empirical_representation_check(int n_max, const Params& p, const McConfig& cfg);

struct ChiSquareCell {
    std::string label;
    std::int64_t observed = 0;
    double expected = 0.0;  // expected count
};

struct ChiSquareReport {
    std::string what;
    ChiSquareResult chi;
    std::int64_t trials = 0;   // trials that entered the test
    std::int64_t excluded = 0; // e.g. split-urn draws with D_t > n
    std::vector<ChiSquareCell> cells;
};

// Exact conditioned joint law of the split urn on Gamma_n x Gamma_n:
// sum_{w <= n} d_w sum_{|omega| = w} M_w(omega) P(eta | omega) P(eta' | omega),
// renormalised by P(D_t <= n).
std::map<std::pair<Partition, Partition>, double> split_urn_joint_law(int n, double t, const Params& p);
ChiSquareReport verify_split_urn(int n, double t, const Params& p, const McConfig& cfg);

// Law of polya_urn_extend(omega, n - |omega|) against conditional_partition_prob.
ChiSquareReport verify_urn_conditional(const Partition& omega, int n, const Params& p, const McConfig& cfg);

// Two-sample comparison: E_PD[rn_weight(omega, Y) P~_gamma(Y)] against
// E_{PD(alpha, theta; omega)}[P~_gamma].
struct TwoSampleReport {
    MCReport reweighted;  // exact_value field holds the direct estimate
    MCReport direct;
    double z_score = 0.0;
    bool pass = false;
};
TwoSampleReport verify_radon_nikodym(const Partition& omega, const Partition& gamma, const Params& p,
                                     const McConfig& cfg);

}  // namespace pdd
