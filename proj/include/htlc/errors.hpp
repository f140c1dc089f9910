#pragma once

#include <stdexcept>
#include <string>

namespace htlc {

/// Argument outside an operation's mathematical domain.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// The agreed exchange rate lies outside the feasible set, so Alice never
/// initiates the swap and the success rate is undefined.
class NotInitiatedError : public DomainError {
public:
    explicit NotInitiatedError(const std::string& what)
        : DomainError("not initiated: " + what) {}
};

/// A numerical kernel failed to meet its tolerance, or produced a result
/// (e.g. a root count) that contradicts the model structure.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what, double estimate = 0.0,
                            double error_bound = 0.0)
        : std::runtime_error(what), estimate_(estimate), error_bound_(error_bound) {}

    double estimate() const noexcept { return estimate_; }
    double error_bound() const noexcept { return error_bound_; }

private:
    double estimate_;
    double error_bound_;
};

}  // namespace htlc
