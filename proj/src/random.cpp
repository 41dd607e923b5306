#include "pdd/random.hpp"

#include <cmath>

#include "pdd/errors.hpp"

namespace pdd {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

Rng make_rng(std::uint64_t seed, std::uint64_t stream) {
    const std::uint64_t a = splitmix64(seed);
    const std::uint64_t b = splitmix64(seed ^ (0x9e3779b97f4a7c15ULL * (stream + 1)));
    std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                      static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
    return Rng(seq);
}

double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double open_uniform01(Rng& rng) {
    double u;
    do u = uniform01(rng);
    while (u == 0.0);
    return u;
}

double exponential(Rng& rng, double rate) {
    if (!(rate > 0.0)) throw DomainError("exponential: rate must be positive");
    return -std::log(open_uniform01(rng)) / rate;
}

double standard_normal(Rng& rng) {
    while (true) {
        const double u = 2.0 * uniform01(rng) - 1.0;
        const double v = 2.0 * uniform01(rng) - 1.0;
        const double s = u * u + v * v;
        if (s > 0.0 && s < 1.0) return u * std::sqrt(-2.0 * std::log(s) / s);
    }
}

namespace {

// Marsaglia-Tsang squeeze for shape >= 1.
double gamma_at_least_one(Rng& rng, double shape) {
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    while (true) {
        double x, v;
        do {
            x = standard_normal(rng);
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = open_uniform01(rng);
        const double x2 = x * x;
        if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
        if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
    }
}

}  // namespace

double gamma_variate(Rng& rng, double shape) {
    if (!(shape > 0.0)) throw DomainError("gamma_variate: shape must be positive");
    if (shape < 1.0) {
        // boost small shapes: G(a) = G(a + 1) * U^(1/a), kept in logs so tiny
        // shapes do not collapse to an exact zero too often
        const double g = gamma_at_least_one(rng, shape + 1.0);
        return g * std::exp(std::log(open_uniform01(rng)) / shape);
    }
    return gamma_at_least_one(rng, shape);
}

double beta_variate(Rng& rng, double a, double b) {
    if (!(a > 0.0) || !(b > 0.0)) throw DomainError("beta_variate: shapes must be positive");
    while (true) {
        const double x = gamma_variate(rng, a);
        const double y = gamma_variate(rng, b);
        if (x + y > 0.0) return x / (x + y);
    }
}

std::vector<double> dirichlet_variate(Rng& rng, std::span<const double> shapes) {
    std::vector<double> out(shapes.size());
    while (true) {
        double total = 0.0;
        for (std::size_t i = 0; i < shapes.size(); ++i) total += out[i] = gamma_variate(rng, shapes[i]);
        if (total > 0.0) {
            for (double& v : out) v /= total;
            return out;
        }
    }
}

}  // namespace pdd
