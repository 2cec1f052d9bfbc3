#pragma once

#include <stdexcept>
#include <string>

namespace mgg {

/// Base of every exception raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input: bad shapes, asymmetric graphs, broken files, bad configs.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Operand shapes do not conform.
class DimensionError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// A caller broke an API precondition (non-scalar loss, missing gradient, ...).
class ContractError : public Error {
public:
    using Error::Error;
};

/// NaN/Inf, degenerate inputs, or a solver that failed to converge.
class NumericalError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

} // namespace mgg
