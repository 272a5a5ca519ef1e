#pragma once

#include <stdexcept>
#include <string>

namespace extraction {

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A numerical procedure failed to converge. Carries the best estimate it had.
class NumericError : public std::runtime_error {
public:
    NumericError(const std::string& what, double partial_estimate = 0.0)
        : std::runtime_error(what), partial_(partial_estimate) {}

    double partial_estimate() const noexcept { return partial_; }

private:
    double partial_;
};

/// Invalid or incomplete configuration.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

}  // namespace extraction
