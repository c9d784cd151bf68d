#pragma once

#include <stdexcept>
#include <string>

namespace bspde {

// Error taxonomy used across the library. The CLI maps these onto exit codes,
// so new failure modes should reuse one of the existing categories.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad user input: malformed config, invalid grid, inconsistent model data.
class ConfigError : public Error {
public:
    using Error::Error;
};

// Non-finite values, failed linear solves, overflow during a computation.
class NumericError : public Error {
public:
    using Error::Error;
};

// A documented precondition does not hold (failed ellipticity check,
// non-boundary-zero test function, u-dependent driver in the risk measure).
class PreconditionError : public Error {
public:
    using Error::Error;
};

// Internal contract violation (wrong child count, mismatched field sizes).
class LogicError : public Error {
public:
    using Error::Error;
};

// Failure while evaluating a coefficient/driver expression. Carries the byte
// offset into the expression source when known, -1 otherwise.
class DriverError : public Error {
public:
    explicit DriverError(const std::string& msg, long offset = -1)
        : Error(msg), offset_(offset) {}
    long offset() const { return offset_; }

private:
    long offset_;
};

} // namespace bspde
