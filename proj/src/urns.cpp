#include "pdd/urns.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "pdd/dual_process.hpp"
#include "pdd/errors.hpp"
#include "pdd/sampling.hpp"

namespace pdd {

namespace {

constexpr std::size_t kMaxSticksPerDraw = 10000000;

Rng child_rng(Rng& parent) {
    const std::uint64_t a = parent();
    const std::uint64_t b = parent();
    return make_rng(a, b);
}

}  // namespace

LazyFrequencies::LazyFrequencies(std::vector<double> fixed, double tail_scale, double alpha, double theta_tail,
                                 Rng stick_rng)
    : tail_scale_(tail_scale), alpha_(alpha), theta_tail_(theta_tail), rng_(std::move(stick_rng)) {
    if (!(tail_scale >= 0.0) || !std::isfinite(tail_scale)) throw DomainError("LazyFrequencies: bad tail scale");
    if (tail_scale > 0.0) Params{alpha, theta_tail}.validate();
    for (double a : fixed) {
        if (!(a >= 0.0) || !std::isfinite(a)) throw DomainError("LazyFrequencies: atoms must be non-negative");
        fixed_mass_ += a;
        atoms_.push_back(a);
        cumulative_.push_back(fixed_mass_);
    }
    fixed_count_ = atoms_.size();
    if (fixed_mass_ + tail_scale_ <= 0.0) throw DomainError("LazyFrequencies: no mass");
}

void LazyFrequencies::realize_next() {
    if (tail_scale_ == 0.0) throw DomainError("LazyFrequencies: nothing left to realise");
    ++sticks_;
    const double v = beta_variate(rng_, 1.0 - alpha_, theta_tail_ + sticks_ * alpha_);
    const double atom = tail_scale_ * remaining_ * v;
    remaining_ *= 1.0 - v;
    atoms_.push_back(atom);
    cumulative_.push_back((cumulative_.empty() ? 0.0 : cumulative_.back()) + atom);
}

std::size_t LazyFrequencies::draw(Rng& rng) {
    const double u = uniform01(rng) * total_mass();
    std::size_t realised = 0;
    while (true) {
        auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
        if (it != cumulative_.end()) return static_cast<std::size_t>(it - cumulative_.begin());
        // u fell into the unrealised tail (or onto rounding slack at the end)
        if (tail_scale_ == 0.0 || unrealized_mass() < 1e-300 || realised > kMaxSticksPerDraw) {
            if (atoms_.empty()) throw NumericalError("LazyFrequencies: draw with no atoms");
            return atoms_.size() - 1;
        }
        realize_next();
        ++realised;
    }
}

void LazyFrequencies::realize_until(double tail_tol, std::size_t max_atoms) {
    while (tail_scale_ > 0.0 && atoms_.size() < max_atoms) {
        const double r = unrealized_mass();
        const double expected_square_tail = r * r * (1.0 - alpha_) / (1.0 + theta_tail_ + sticks_ * alpha_);
        if (expected_square_tail <= tail_tol) break;
        realize_next();
    }
}

Frequencies LazyFrequencies::truncated(double tail_tol, std::size_t max_atoms) {
    realize_until(tail_tol, max_atoms);
    return snapshot();
}

PowerSums LazyFrequencies::power_sums(int max_order) const {
    if (max_order < 0) throw DomainError("power_sums: negative order");
    std::vector<double> sums(static_cast<std::size_t>(max_order) + 1, 0.0);
    sums[0] = 1.0;
    if (max_order >= 1) sums[1] = total_mass();
    for (double a : atoms_) {
        double power = a;
        for (int k = 2; k <= max_order; ++k) sums[static_cast<std::size_t>(k)] += power *= a;
    }
    const double r = unrealized_mass();
    if (r > 0.0) {
        const double theta_rest = theta_tail_ + sticks_ * alpha_;
        double moment = r;  // r^k (1 - alpha)_(k-1) / (1 + theta_rest)_(k-1)
        for (int k = 2; k <= max_order; ++k) {
            moment *= r * (k - 1 - alpha_) / (theta_rest + k - 1);
            sums[static_cast<std::size_t>(k)] += moment;
        }
    }
    return PowerSums(std::move(sums));
}

Frequencies LazyFrequencies::top(std::size_t k) {
    while (tail_scale_ > 0.0 && static_cast<std::size_t>(sticks_) < k) realize_next();
    std::vector<double> sorted = atoms_;
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    if (sorted.size() > k) sorted.resize(k);
    return Frequencies(std::move(sorted));
}

Frequencies LazyFrequencies::snapshot() const { return Frequencies(atoms_); }

LazyFrequencies stick_breaking_sampler(const Params& p, Rng& rng) {
    p.validate();
    return LazyFrequencies({}, 1.0, p.alpha, p.theta, child_rng(rng));
}

namespace {

Partition from_colour_counts(const std::map<std::size_t, int>& counts) {
    std::vector<int> parts;
    parts.reserve(counts.size());
    for (const auto& [colour, c] : counts) parts.push_back(c);
    return Partition::from_unsorted(parts);
}

}  // namespace

Partition sample_configuration(LazyFrequencies& x, int w, Rng& rng) {
    if (w < 0) throw DomainError("sample_configuration: w must be non-negative");
    std::map<std::size_t, int> counts;
    for (int i = 0; i < w; ++i) ++counts[x.draw(rng)];
    return from_colour_counts(counts);
}

Partition sample_configuration(const Frequencies& x, int w, Rng& rng) {
    if (w < 0) throw DomainError("sample_configuration: w must be non-negative");
    const auto& atoms = x.atoms();
    std::vector<double> cumulative;
    double c = 0.0;
    for (double a : atoms) cumulative.push_back(c += a);
    std::map<std::size_t, int> counts;
    std::size_t dust_colour = atoms.size();
    for (int i = 0; i < w; ++i) {
        const double u = uniform01(rng);
        auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
        if (it != cumulative.end())
            ++counts[static_cast<std::size_t>(it - cumulative.begin())];
        else if (x.residual() > 0.0)
            ++counts[dust_colour++];  // dust: a colour nobody else shares
        else
            ++counts[atoms.size() - 1];  // rounding slack on a full-mass point
    }
    return from_colour_counts(counts);
}

UrnRun polya_urn_run(const Partition& omega, int m, const Params& p, Rng& rng) {
    p.validate();
    if (m < 0) throw DomainError("polya_urn_extend: m must be non-negative");
    std::vector<int> counts(omega.begin(), omega.end());
    std::vector<int> fresh(counts.size(), 0);  // balls added by this run, per colour
    std::vector<int> ball_colour;              // colour of every ball, by ball index
    std::vector<int> first_ball;               // the ball carrying mass 1 - alpha, per colour
    ball_colour.reserve(static_cast<std::size_t>(omega.size() + m));
    for (std::size_t j = 0; j < counts.size(); ++j) {
        first_ball.push_back(static_cast<int>(ball_colour.size()));
        ball_colour.insert(ball_colour.end(), static_cast<std::size_t>(counts[j]), static_cast<int>(j));
    }
    for (int step = 0; step < m; ++step) {
        const int w = static_cast<int>(ball_colour.size());
        const int r = static_cast<int>(counts.size());
        const bool new_colour = w == 0 || uniform01(rng) * (p.theta + w) < p.theta + r * p.alpha;
        if (new_colour) {
            counts.push_back(1);
            fresh.push_back(1);
            first_ball.push_back(w);
            ball_colour.push_back(r);
            continue;
        }
        // colour j with probability proportional to counts[j] - alpha: pick a
        // ball uniformly and keep it unless it is a discounted first ball
        std::uniform_int_distribution<int> pick(0, w - 1);
        while (true) {
            const int b = pick(rng);
            const int j = ball_colour[static_cast<std::size_t>(b)];
            if (b == first_ball[static_cast<std::size_t>(j)] && uniform01(rng) < p.alpha) continue;
            ++counts[static_cast<std::size_t>(j)];
            ++fresh[static_cast<std::size_t>(j)];
            ball_colour.push_back(j);
            break;
        }
    }
    return {Partition::from_unsorted(counts), Partition::from_unsorted(fresh)};
}

Partition polya_urn_extend(const Partition& omega, int m, const Params& p, Rng& rng) {
    return polya_urn_run(omega, m, p, rng).combined;
}

template <class T>
T conditional_partition_prob(const Partition& eta, const Partition& omega, const BasicParams<T>& p) {
    p.validate();
    if (!is_subpartition(omega, eta)) return T(0);
    if (omega == eta) return T(1);
    const T lower = omega.empty() ? T(1) : ewens_pitman(omega, p);
    return from_rational<T>(hypergeom(omega, eta)) * ewens_pitman(eta, p) / lower;
}

LazyFrequencies sample_pd_conditional(const Partition& omega, const Params& p, Rng& rng) {
    p.validate();
    if (omega.empty()) throw DomainError("sample_pd_conditional: omega must be non-empty");
    const int w = omega.size();
    const int r = omega.length();
    const double z = beta_variate(rng, w - r * p.alpha, p.theta + r * p.alpha);
    std::vector<double> shapes;
    for (int part : omega) shapes.push_back(part - p.alpha);
    std::vector<double> block = dirichlet_variate(rng, shapes);
    for (double& b : block) b *= z;
    return LazyFrequencies(std::move(block), 1.0 - z, p.alpha, p.theta + r * p.alpha, child_rng(rng));
}

double rn_weight(const Partition& omega, const Frequencies& y, const Params& p) {
    if (omega.empty()) return 1.0;
    return eval_sampling_prob_direct(omega, y) / ewens_pitman(omega, p);
}

SplitUrnDraw split_urn(int n, double t, const Params& p, Rng& rng) {
    p.validate();
    if (n < 1) throw DomainError("split_urn: n must be at least 1");
    if (!(t > 0.0)) throw DomainError("split_urn: t must be positive");
    SplitUrnDraw out;
    out.ancestors = sample_block_count_from_infinity(p.theta, t, rng);
    if (out.ancestors > n) return out;
    out.defined = true;
    out.ancestor_config = polya_urn_extend(Partition{}, out.ancestors, p, rng);
    out.first = polya_urn_extend(out.ancestor_config, n - out.ancestors, p, rng);
    out.second = polya_urn_extend(out.ancestor_config, n - out.ancestors, p, rng);
    return out;
}

template double conditional_partition_prob(const Partition&, const Partition&, const BasicParams<double>&);
template Rational conditional_partition_prob(const Partition&, const Partition&, const BasicParams<Rational>&);

}  // namespace pdd
