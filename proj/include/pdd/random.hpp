#pragma once
// Seeded random streams and the handful of continuous laws the samplers need.
//
// Stream splitting: the generator for (seed, stream) is std::mt19937_64 seeded
// through std::seed_seq with the four 32-bit halves of splitmix64(seed) and
// splitmix64(seed ^ golden * (stream + 1)). Distinct stream ids give
// statistically independent streams; the same pair always gives the same
// stream on one platform.

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace pdd {

using Rng = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x);

Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0);

double uniform01(Rng& rng);          // in [0, 1)
double open_uniform01(Rng& rng);     // in (0, 1)
double exponential(Rng& rng, double rate);
// Marsaglia polar method; the second variate of each pair is discarded so the
// function stays stateless.
double standard_normal(Rng& rng);
double gamma_variate(Rng& rng, double shape);  // unit scale
double beta_variate(Rng& rng, double a, double b);
std::vector<double> dirichlet_variate(Rng& rng, std::span<const double> shapes);

}  // namespace pdd
