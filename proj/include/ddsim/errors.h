#ifndef DDSIM_ERRORS_H
#define DDSIM_ERRORS_H

#include <stdexcept>
#include <string>

namespace ddsim {

/// Base class of every error raised by the library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Operands of incompatible dimension.
struct DimensionMismatch : Error {
    using Error::Error;
};

/// An input failed a role check (Hermitian, unitary, normalized state, ...).
struct InvalidOperator : Error {
    using Error::Error;
};

/// A group element is not unitary.
struct NonUnitaryElement : Error {
    using Error::Error;
};

/// A product of two group elements does not land in any listed phase class.
struct ClosureViolation : Error {
    using Error::Error;
};

/// A closed-form bound was evaluated outside the region where it holds.
struct RegimeViolation : Error {
    using Error::Error;
};

/// Malformed or inconsistent configuration. `where` names the offending key or line.
struct ConfigError : Error {
    using Error::Error;
};

/// The halve-and-compare substep check exceeded its tolerance.
struct ConvergenceFailure : Error {
    using Error::Error;
};

}  // namespace ddsim

#endif
