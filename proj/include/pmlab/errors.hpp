#pragma once

#include <stdexcept>
#include <string>

namespace pmlab {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An operation was called outside its documented domain.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Two fields with different average slopes cannot be ordered on a cell.
class OrderingUndefined : public Error {
 public:
  using Error::Error;
};

/// A density returned a non-finite value.
class EvaluationError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// Classified translations are inconsistent with a lexicographic invariant
/// system (self-intersection beyond the scan radius or tolerance trouble).
class ExtractionError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace pmlab
