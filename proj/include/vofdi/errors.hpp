#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace vofdi {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A precondition on an argument or configuration block was violated.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

class DivergentIntegral : public Error {
public:
    using Error::Error;
};

class NoSignChange : public Error {
public:
    using Error::Error;
};

class NonFiniteValue : public Error {
public:
    using Error::Error;
};

/// Regression design could not be estimated (dimension mismatch, no retained column, ...).
class RegressionError : public Error {
public:
    using Error::Error;
};

class SingularCovariance : public Error {
public:
    using Error::Error;
};

class UnknownColumn : public Error {
public:
    using Error::Error;
};

/// Equilibrium search failed to bracket a root.
class SolverError : public Error {
public:
    using Error::Error;
};

/// Malformed panel file. `line()` is the 1-based line number in the file (header is line 1),
/// or 0 when the problem is not tied to a single line.
class SchemaError : public Error {
public:
    SchemaError(const std::string& what, std::size_t line)
        : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

}  // namespace vofdi
