#pragma once

#include <stdexcept>
#include <string>

namespace entrance {

/// Malformed or unsupported process specification (bad parameters, rate
/// function not evaluable, negative diffusion/jump modulation, ...).
class SpecError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Argument outside the domain of an operation (eps <= 0, b >= x0, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A documented precondition of an operation does not hold.
class PreconditionError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Non-finite intermediate in the numerical scheme. Carries the last state
/// that was still finite.
class NumericalError : public std::runtime_error {
public:
    NumericalError(const std::string& what, double last_state)
        : std::runtime_error(what), last_state_(last_state) {}

    double last_state() const noexcept { return last_state_; }

private:
    double last_state_;
};

}  // namespace entrance
