#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace hypmax {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A coordinate vector that is not on the upper sheet of the hyperboloid.
class InvalidPoint : public Error {
public:
    using Error::Error;
};

/// Argument outside the mathematical domain of an operation (negative radius, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Parameter violates a stated admissibility range (delta too large, ...).
class RangeError : public Error {
public:
    using Error::Error;
};

/// Quadrature did not converge, or an integrand produced a non-finite value.
/// `witness` carries the coordinates of the offending point when one exists.
class NumericalError : public Error {
public:
    NumericalError(const std::string& what, std::vector<double> witness = {})
        : Error(what), witness_(std::move(witness)) {}

    const std::vector<double>& witness() const noexcept { return witness_; }

private:
    std::vector<double> witness_;
};

/// Malformed experiment configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

} // namespace hypmax
