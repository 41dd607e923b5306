#pragma once

#include <stdexcept>
#include <string>

namespace pdd {

// Parameter or argument outside an operation's domain.
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A request larger than a configured resource cap (e.g. partition enumeration).
class ResourceLimit : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Base for floating-point failures: lost precision, out-of-range probabilities.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// The alternating series could not be stabilised at the highest working precision.
class PrecisionExhausted : public NumericalError {
public:
    using NumericalError::NumericalError;
};

}  // namespace pdd
