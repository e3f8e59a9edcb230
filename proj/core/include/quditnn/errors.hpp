#pragma once

#include <stdexcept>
#include <string>

namespace quditnn {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Shapes, sizes, indices or configuration values are inconsistent.
class StructuralError : public Error {
  public:
    using Error::Error;
};

/// An input violates a documented numerical precondition (e.g. Hermiticity).
class PreconditionError : public Error {
  public:
    using Error::Error;
};

/// A computation produced non-finite values or failed to converge.
class NumericalError : public Error {
  public:
    using Error::Error;
};

/// Input file does not follow the expected column layout.
class SchemaError : public Error {
  public:
    using Error::Error;
};

/// A cell or field could not be parsed.
class ParseError : public Error {
  public:
    using Error::Error;
};

/// The `first-two` readout was asked to renormalize a vanishing mass.
class DegenerateReadoutError : public Error {
  public:
    using Error::Error;
};

} // namespace quditnn
