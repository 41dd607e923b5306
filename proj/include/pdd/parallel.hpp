#pragma once
// Deterministic sharding of Monte Carlo trials.
//
// Worker k (0-based) of W runs trials k*T/W .. (k+1)*T/W - 1 with the stream
// make_rng(seed, k + 1); accumulators are merged in worker order. The result
// depends only on (seed, trials, W), never on thread scheduling.

#include <cstdint>
#include <exception>
#include <thread>
#include <vector>

#include "pdd/errors.hpp"
#include "pdd/random.hpp"

namespace pdd {

struct McConfig {
    std::int64_t trials = 100000;
    std::uint64_t seed = 0;
    int workers = 1;
    double z_threshold = 3.0;
    double p_floor = 1e-3;
    // Stick realisation stops once the expected squared tail mass is below this;
    // estimators add the expected tail power sums, so the remaining bias is
    // second order in the tail.
    double tail_tolerance = 1e-6;
};

// step(rng, acc) runs one trial; merge(into, from) pools two accumulators.
template <class Acc, class Step, class Merge>
Acc run_sharded(const McConfig& cfg, const Acc& init, Step step, Merge merge) {
    if (cfg.trials < 0) throw DomainError("trials must be non-negative");
    if (cfg.workers < 1) throw DomainError("workers must be at least 1");
    const int workers = cfg.workers;
    std::vector<Acc> partial(static_cast<std::size_t>(workers), init);
    std::vector<std::exception_ptr> failures(static_cast<std::size_t>(workers));
    auto body = [&](int k) {
        try {
            Rng rng = make_rng(cfg.seed, static_cast<std::uint64_t>(k) + 1);
            const std::int64_t begin = cfg.trials * k / workers;
            const std::int64_t end = cfg.trials * (k + 1) / workers;
            for (std::int64_t i = begin; i < end; ++i) step(rng, partial[static_cast<std::size_t>(k)]);
        } catch (...) {
            failures[static_cast<std::size_t>(k)] = std::current_exception();
        }
    };
    if (workers == 1) {
        body(0);
    } else {
        std::vector<std::thread> threads;
        for (int k = 0; k < workers; ++k) threads.emplace_back(body, k);
        for (auto& th : threads) th.join();
    }
    for (auto& f : failures)
        if (f) std::rethrow_exception(f);
    Acc out = init;
    for (const Acc& a : partial) merge(out, a);
    return out;
}

}  // namespace pdd
