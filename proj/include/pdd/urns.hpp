#pragma once
// Samplers: GEM stick-breaking for PD(alpha, theta), the generalized Polya urn
// (two-parameter Chinese restaurant) started from a configuration, the
// posterior PD(alpha, theta; omega), Radon-Nikodym reweighting and the split
// urn.

#include <cstdint>
#include <optional>
#include <vector>

#include "pdd/frequencies.hpp"
#include "pdd/params.hpp"
#include "pdd/partition.hpp"
#include "pdd/random.hpp"
#include "pdd/sampling.hpp"

namespace pdd {

// A random point of the simplex realised on demand: a fixed block of atoms
// followed by tail_scale times a GEM(alpha, theta_tail) stick-breaking
// sequence (sticks V_k ~ Beta(1 - alpha, theta_tail + k alpha)). Realised
// atoms never change; draws by size extend the sequence until they resolve,
// so sampling individuals is exact with no dust approximation.
class LazyFrequencies {
public:
    LazyFrequencies(std::vector<double> fixed, double tail_scale, double alpha, double theta_tail, Rng stick_rng);

    std::size_t size() const { return atoms_.size(); }  // realised atoms
    double atom(std::size_t i) const { return atoms_.at(i); }
    const std::vector<double>& atoms() const { return atoms_; }  // generation order
    double unrealized_mass() const { return tail_scale_ * remaining_; }
    double total_mass() const { return fixed_mass_ + tail_scale_; }

    void realize_next();
    // Index of the atom hit by one individual drawn by size.
    std::size_t draw(Rng& rng);

    // Realises sticks until the expected squared tail mass
    // unrealized^2 (1 - alpha) / (1 + theta_tail + k alpha) drops below
    // tail_tol (or max_atoms is reached).
    void realize_until(double tail_tol = 1e-9, std::size_t max_atoms = 100000);
    // realize_until, then the realised atoms sorted descending with the
    // unrealised mass as residual.
    Frequencies truncated(double tail_tol = 1e-9, std::size_t max_atoms = 100000);
    // Power sums of the realised atoms plus the conditional expectation of the
    // unrealised tail, r^k (1 - alpha)_(k-1) / (1 + theta_tail + k' alpha)_(k-1)
    // after k' sticks. Polynomials in these sums are then biased only at
    // second order in the tail.
    PowerSums power_sums(int max_order) const;
    // The K largest realised atoms after realising at least K sticks.
    Frequencies top(std::size_t k);
    Frequencies snapshot() const;

private:
    std::vector<double> atoms_;
    std::vector<double> cumulative_;
    std::size_t fixed_count_ = 0;
    double fixed_mass_ = 0.0;
    double tail_scale_ = 0.0;
    double remaining_ = 1.0;  // product of (1 - V_j) over realised sticks
    int sticks_ = 0;
    double alpha_ = 0.0;
    double theta_tail_ = 1.0;
    Rng rng_;
};

// Default truncation used when a lazily sampled point is evaluated.
inline constexpr double kDefaultTailTolerance = 1e-9;

LazyFrequencies stick_breaking_sampler(const Params& p, Rng& rng);

// Colour configuration of w individuals drawn by size. For a Frequencies with
// dust, every individual landing in the residual gets a new colour of its own.
Partition sample_configuration(LazyFrequencies& x, int w, Rng& rng);
Partition sample_configuration(const Frequencies& x, int w, Rng& rng);

// Urn run: m further draws after the configuration omega (possibly empty).
// A new colour appears with probability (theta + r alpha) / (theta + w), an
// existing colour j is joined with probability (omega_j - alpha) / (theta + w).
Partition polya_urn_extend(const Partition& omega, int m, const Params& p, Rng& rng);

struct UrnRun {
    Partition combined;  // configuration of the old and the new balls together
    Partition added;     // configuration of the m new balls alone
};
UrnRun polya_urn_run(const Partition& omega, int m, const Params& p, Rng& rng);

// P(urn from omega reaches eta) = H(omega | eta) M_n(eta) / M_w(omega), with
// M_0(empty) = 1. Zero when omega is not contained in eta.
template <class T>
T conditional_partition_prob(const Partition& eta, const Partition& omega, const BasicParams<T>& p);

// PD(alpha, theta; omega) = Z Dir(omega_1 - alpha, ..., omega_r - alpha)
// (+) (1 - Z) PD(alpha, theta + r alpha), Z ~ Beta(|omega| - r alpha, theta + r alpha).
LazyFrequencies sample_pd_conditional(const Partition& omega, const Params& p, Rng& rng);

// P->_omega(y) / E[P->_omega]: the density of PD(alpha, theta; omega) against PD(alpha, theta).
double rn_weight(const Partition& omega, const Frequencies& y, const Params& p);

struct SplitUrnDraw {
    int ancestors = 0;          // D_t
    bool defined = false;       // false when D_t > n ("undefined at size n")
    Partition ancestor_config;  // U_{D_t}; empty when undefined
    Partition first;
    Partition second;
};
SplitUrnDraw split_urn(int n, double t, const Params& p, Rng& rng);

}  // namespace pdd
