#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <stdexcept>
#include <string>

namespace comet {

using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidInput : public Error {
public:
    using Error::Error;
};

/// Raised when a parameter combination makes the method stall (e.g. alpha == 0).
class DegenerateConfiguration : public Error {
public:
    using Error::Error;
};

/// prox of the shifted regularizer is undefined: t * mu_g >= 1.
class StepTooLarge : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class ReferenceUnreliable : public Error {
public:
    using Error::Error;
};

class NumericalFailure : public Error {
public:
    using Error::Error;
};

inline void require_dim(const Vector& x, Index n, const char* what) {
    if (x.size() != n) {
        throw InvalidInput(std::string(what) + ": expected dimension " + std::to_string(n) +
                           ", got " + std::to_string(x.size()));
    }
}

} // namespace comet
