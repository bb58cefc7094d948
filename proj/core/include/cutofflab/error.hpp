#pragma once

#include <stdexcept>
#include <string>

namespace cutofflab {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parameters outside their documented domain.
class InvalidParameters : public Error {
 public:
  using Error::Error;
};

/// Malformed input text (CSV rows, config values).
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Input is well-formed but lacks a required column or key.
class SchemaError : public Error {
 public:
  using Error::Error;
};

/// A parsed value violates a domain invariant (e.g. rank out of range).
class InvariantError : public Error {
 public:
  using Error::Error;
};

/// File could not be read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

/// An estimator cannot be evaluated on the given data: empty side of a
/// window, rank-deficient design, too few clusters, and so on.
class EstimationError : public Error {
 public:
  using Error::Error;
};

}  // namespace cutofflab
