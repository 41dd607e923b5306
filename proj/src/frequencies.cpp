#include "pdd/frequencies.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <stdexcept>

namespace pdd {

Frequencies::Frequencies(std::vector<double> atoms) : atoms_(std::move(atoms)) {
    for (double a : atoms_)
        if (!(a >= 0.0) || !std::isfinite(a))
            throw std::invalid_argument("frequencies: atoms must be finite and non-negative");
    std::erase(atoms_, 0.0);
    std::sort(atoms_.begin(), atoms_.end(), std::greater<>());
    // Summing smallest-first keeps the residual accurate for long atom lists.
    double total = std::accumulate(atoms_.rbegin(), atoms_.rend(), 0.0);
    double residual = 1.0 - total;
    if (residual < -kTolerance)
        throw std::invalid_argument("frequencies: atoms sum to more than 1");
    residual_ = std::clamp(residual, 0.0, 1.0);
    if (residual_ <= kTolerance) residual_ = 0.0;
}

}  // namespace pdd
