#pragma once

#include <stdexcept>
#include <string>

namespace robustpi {

/// Malformed input: bad rational literal, inconsistent model, invalid policy.
class ModelError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// An operation was asked for something outside its supported scope
/// (for example an Lp(p>=2) set handed to a sort-based oracle).
class UnsupportedError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/**
 * A condition that the theory guarantees did not hold: a singular
 * (I - gamma P), an iteration guard was exceeded, a fixed point check failed.
 * Seeing one of these means there is a bug somewhere.
 */
class InvariantViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

class SingularMatrixError : public InvariantViolation {
public:
    using InvariantViolation::InvariantViolation;
};

} // namespace robustpi
