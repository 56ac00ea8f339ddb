#pragma once

#include <stdexcept>
#include <string>

namespace obham {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Malformed arguments or parameters (bad dimensions, out-of-range values,
/// unparseable configuration).
struct InvalidInput : Error {
    using Error::Error;
};

/// A metric that must be symmetric positive definite is not.
struct SingularMetric : Error {
    using Error::Error;
};

/// A structure matrix (symplectic form, observation Jacobian) lost rank.
struct DegenerateStructure : Error {
    using Error::Error;
};

/// An operation that needs a sample set received too few points.
struct InsufficientSamples : InvalidInput {
    using InvalidInput::InvalidInput;
};

/// Evaluation outside the working region (negative boundary distance, etc.).
struct DomainError : Error {
    using Error::Error;
};

} // namespace obham
