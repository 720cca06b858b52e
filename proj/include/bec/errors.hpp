#pragma once

#include <stdexcept>
#include <string>

namespace bec {

// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// A series or sum that does not converge for the given parameters
// (e.g. a free mode with mu >= eps).
class DivergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Quadrature, eigen-solver or root-finder failure.
class NumericError : public std::runtime_error {
public:
    NumericError(const std::string& what, double residual = 0.0)
        : std::runtime_error(what), residual_(residual) {}

    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

class SolverError : public NumericError {
public:
    SolverError(const std::string& what, double lo, double hi)
        : NumericError(what), lo_(lo), hi_(hi) {}

    double bracket_lo() const noexcept { return lo_; }
    double bracket_hi() const noexcept { return hi_; }

private:
    double lo_;
    double hi_;
};

// Requested problem size exceeds a hard resource cap.
class ResourceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace bec
