#pragma once

#include <string>
#include <vector>

namespace pdd {

// A point of the closed ordered simplex: finitely many atoms (descending) plus
// the unallocated "dust" mass 1 - sum(atoms).
class Frequencies {
public:
    static constexpr double kTolerance = 1e-12;

    Frequencies() : residual_(1.0) {}
    // Sorts atoms descending, drops exact zeros, and clamps the residual into
    // [0, 1]. Throws std::invalid_argument for negative atoms or when the atoms
    // sum to more than 1 + kTolerance.
    explicit Frequencies(std::vector<double> atoms);

    const std::vector<double>& atoms() const noexcept { return atoms_; }
    double residual() const noexcept { return residual_; }
    bool full_mass() const noexcept { return residual_ == 0.0; }

private:
    std::vector<double> atoms_;
    double residual_;
};

}  // namespace pdd
