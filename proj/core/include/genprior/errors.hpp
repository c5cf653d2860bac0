#pragma once

#include <stdexcept>
#include <string>

namespace genprior {

/// Bad argument values or shapes passed to a public operation.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A factorization or solve failed even after jitter escalation.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input text or binary file.
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input parsed but is internally inconsistent (e.g. layer shapes do not compose).
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The requested operation is not available for this object (e.g. no encoder).
class UnsupportedOperation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

}  // namespace genprior
