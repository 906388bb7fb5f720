#pragma once

#include <stdexcept>
#include <string>

namespace stratlab {

// Precondition violations: bad dimensions, out-of-range parameters,
// parameter combinations excluded by the inequalities.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A grid or operator exceeds a configured size cap.
class ResourceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A multiplier or power is undefined on part of the spectrum.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Quadrature or linear-solver failure.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Input that makes a ratio meaningless (zero gradient, all-zero function).
class DegenerateInput : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace stratlab
