#pragma once

#include <map>
#include <span>
#include <vector>

#include "pdd/frequencies.hpp"
#include "pdd/params.hpp"
#include "pdd/partition.hpp"

namespace pdd {

template <class T>
T from_rational(const Rational& q);
template <>
inline double from_rational<double>(const Rational& q) { return to_double(q); }
template <>
inline Rational from_rational<Rational>(const Rational& q) { return q; }

// binom(n; eta) / prod_k a_k(eta)!, the factor turning P~_eta into P->_eta.
Rational sampling_prefactor(const Partition& eta);

// Ewens-Pitman probability M_n(eta). Requires |eta| >= 1.
template <class T>
T ewens_pitman(const Partition& eta, const BasicParams<T>& p);

// E_{alpha,theta}[P~_eta]; equals 1 for the empty partition and for (1).
template <class T>
T mean_augmented_monomial(const Partition& eta, const BasicParams<T>& p);

// P~_eta written over singleton-free partitions (the empty partition stands
// for the constant 1), obtained by repeatedly removing a singleton:
//   P~_eta = P~_{eta - e_i} - sum_{j != i} P~_{eta - e_i + e_j}.
// Integer coefficients; memoised per eta.
using SingletonFreeExpansion = std::map<Partition, BigInt>;
SingletonFreeExpansion eliminate_singletons(const Partition& eta);

// Monomial symmetric function m_mu evaluated on a finite list of atoms.
double monomial_symmetric(const Partition& mu, std::span<const double> atoms);

// Continuous extension of the augmented monomial P~_eta on the closed simplex,
// via singleton elimination followed by atom-only evaluation.
double eval_augmented_monomial(const Partition& eta, const Frequencies& x);

// Same function from the dust form: singletons may fall in the residual mass,
// P~_eta(x) = prod a_k! * sum_j r^j / j! * m_{eta minus j singletons}(atoms).
// Every term is non-negative, so this stays accurate for many singletons.
double eval_augmented_monomial_direct(const Partition& eta, const Frequencies& x);

// Sampling probability P->_eta(x) of colour configuration eta in n draws.
double eval_sampling_prob(const Partition& eta, const Frequencies& x);
double eval_sampling_prob_direct(const Partition& eta, const Frequencies& x);

template <class T>
struct ConsistencyReport {
    int n = 0;
    int relations = 0;
    T max_discrepancy{0};
};

// Checks M_{n-1}(omega) = sum_eta p_down(eta, omega) M_n(eta) for every omega in
// Gamma_{n-1}. Requires n >= 2.
template <class T>
ConsistencyReport<T> check_consistency(int n, const BasicParams<T>& p);

// p_up(eta, lambda) = M_{n+1}(lambda) / M_n(eta) * p_down(lambda, eta).
template <class T>
std::map<Partition, T> up_step_distribution(const Partition& eta, const BasicParams<T>& p);

// Up-down kernel T(eta, eta~); throws DomainError when sizes differ.
template <class T>
T updown_kernel(const Partition& eta, const Partition& eta_tilde, const BasicParams<T>& p);

// Power sums of a point of the closed simplex with the dust convention:
// p_1 = 1 (the dust carries first-order mass) and p_k = sum atoms^k for k >= 2.
// The continuous extension of P~_eta is the Moebius expansion
//   P~_eta = sum over set partitions pi of the parts of eta
//            prod_{B in pi} (-1)^{|B|-1} (|B|-1)! p_{sum of the parts in B},
// which makes many evaluations on one point cheap. The alternating sum loses
// accuracy as l(eta) grows; intended for small partitions (l(eta) <= 8).
class PowerSums {
public:
    PowerSums(const Frequencies& x, int max_order);
    // From precomputed sums; sums[0] = 1 and sums[1] = total mass.
    explicit PowerSums(std::vector<double> sums);
    int max_order() const { return static_cast<int>(sums_.size()) - 1; }
    double operator[](int k) const { return sums_.at(static_cast<std::size_t>(k)); }
    double augmented_monomial(const Partition& eta) const;
    double sampling_prob(const Partition& eta) const;

private:
    std::vector<double> sums_;  // sums_[0] = 1
};

}  // namespace pdd
