#pragma once

#include <stdexcept>
#include <string>

namespace fiberfield {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A state became non-finite or violated a hard invariant.
class InvalidStateError : public Error {
public:
    using Error::Error;
};

/// Explicit time step violates a stability constraint.
class CflError : public Error {
public:
    using Error::Error;
};

/// Malformed or out-of-range configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Inputs do not match (grid mismatch, stale cache, unequal sizes).
class MismatchError : public Error {
public:
    using Error::Error;
};

}  // namespace fiberfield
