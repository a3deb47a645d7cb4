#pragma once

#include <stdexcept>
#include <string>

namespace tnlm {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed arguments: repeated axes, non-partitions, bad sizes, bad ids.
class ArgumentError : public Error {
public:
    using Error::Error;
};

/// Incompatible tensor or edge dimensions.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// An isometry cannot exist because the domain is larger than the codomain.
class NoIsometryPossible : public Error {
public:
    using Error::Error;
};

/// Rank-deficient input to the polar retraction.
class SingularityError : public Error {
public:
    explicit SingularityError(const std::string& what, double smallest_singular_value)
        : Error(what), smallest_singular_value_(smallest_singular_value) {}
    double smallest_singular_value() const noexcept { return smallest_singular_value_; }

private:
    double smallest_singular_value_;
};

/// Directed cycle in a quiver.
class CycleError : public Error {
public:
    using Error::Error;
};

/// Operation requires a pure-state model (single In edge of dimension 1).
class PreconditionError : public Error {
public:
    using Error::Error;
};

/// Conditioning on a prefix of zero probability.
class ConditioningError : public Error {
public:
    using Error::Error;
};

/// Operation is only defined for a restricted family of graphs.
class UnsupportedTopology : public Error {
public:
    using Error::Error;
};

/// Gradient of -log|A|^2 at a sequence with zero amplitude.
class SingularGradient : public Error {
public:
    using Error::Error;
};

/// Decay fit could not be attempted.
class FitError : public Error {
public:
    using Error::Error;
};

/// Model file is corrupt, truncated or of an unknown version.
class FormatError : public Error {
public:
    using Error::Error;
};

}  // namespace tnlm
