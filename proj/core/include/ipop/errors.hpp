#pragma once

#include <stdexcept>
#include <string>

namespace ipop {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed or inconsistent caller input (bad CSV, mixed module ids,
/// underdetermined fit, invalid config values).
class InputError : public Error {
public:
    using Error::Error;
};

/// A current or power query outside a module's fitted operating range.
class RangeError : public Error {
public:
    using Error::Error;
};

/// A demand that no allocation over the given modules can serve.
class FeasibilityError : public Error {
public:
    using Error::Error;
};

/// A fitted model violating a structural requirement (non-monotone output
/// power, efficiency above one).
class ModelError : public Error {
public:
    using Error::Error;
};

/// Rank-deficient or otherwise numerically unusable fit system.
class ConditioningError : public Error {
public:
    using Error::Error;
};

/// An iterative solver failed to converge or reached an inconsistent state.
class SolverError : public Error {
public:
    using Error::Error;
};

/// Request exceeds what a component is designed to handle (e.g. exhaustive
/// search over too many modules).
class CapabilityError : public Error {
public:
    using Error::Error;
};

/// Closed-form expression evaluated outside its real domain.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Vanishing input-power slope where a marginal rate is requested.
class SingularityError : public Error {
public:
    using Error::Error;
};

} // namespace ipop
