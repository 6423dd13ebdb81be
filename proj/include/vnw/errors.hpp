#pragma once

#include <stdexcept>
#include <string>

namespace vnw {

// Root of every failure raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Argument outside the admitted domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

// Evaluation requested at a point where the expression is singular
// (r = 0 for a divergent power, or a node of sin(kr) for the ctg form).
class SingularPointError : public DomainError {
public:
    using DomainError::DomainError;
};

// A series or adaptive scheme did not reach its tolerance.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, double achieved_error)
        : Error(what), achieved_error_(achieved_error) {}

    double achieved_error() const noexcept { return achieved_error_; }

private:
    double achieved_error_;
};

// Result does not fit in a double (growing modulation for a > 0).
class OverflowError : public Error {
public:
    using Error::Error;
};

class InsufficientDataError : public Error {
public:
    using Error::Error;
};

// Two evaluation routes that must agree did not.
class ConsistencyError : public Error {
public:
    using Error::Error;
};

}  // namespace vnw
