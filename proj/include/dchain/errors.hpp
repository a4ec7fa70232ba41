#pragma once

#include <stdexcept>
#include <string>

namespace dchain {

/// Base class of every error thrown by the library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Operands live in different ambient spaces.
struct DimensionError : Error {
    using Error::Error;
};

/// Grades (or form degrees) do not match what the operation requires.
struct GradeError : Error {
    using Error::Error;
};

/// A wedge or extrusion asked for a grade above the ambient dimension.
/// Lambda_k(R^n) is the zero space for k > n.
struct DegenerateGradeError : Error {
    using Error::Error;
};

/// A point fell outside the domain an operation was restricted to.
struct DomainError : Error {
    using Error::Error;
};

/// The interior product and extrusion are only defined for simple multivectors.
struct NotSimpleError : Error {
    using Error::Error;
};

/// An affine cell whose edge vectors are linearly dependent.
struct DegenerateCellError : Error {
    using Error::Error;
};

/// A linear program had no feasible point.
struct InfeasibleError : Error {
    using Error::Error;
};

/// Pairing-based cycle test rejected the input chain or form.
struct NotACycleError : Error {
    using Error::Error;
};

/// Malformed text or JSON input.
struct ParseError : Error {
    using Error::Error;
};

/// A matrix representation was requested for an operator whose image leaves the output basis.
struct BasisEscapeError : Error {
    using Error::Error;
};

}  // namespace dchain
