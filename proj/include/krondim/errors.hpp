#pragma once

#include <stdexcept>
#include <string>

namespace krondim {

/// Invalid argument to a library operation (out-of-range parameter, bad shape).
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A row or column label that does not exist in the addressed matrix.
class LabelError : public ArgumentError {
 public:
  using ArgumentError::ArgumentError;
};

/// A spec the requested computation cannot handle (e.g. non-integer statistics
/// for the Laurent substitution).
class UnsupportedSpecError : public ArgumentError {
 public:
  using ArgumentError::ArgumentError;
};

/// A construction hypothesis does not hold for the supplied inputs. The message
/// names the failed condition.
class PreconditionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An enumeration would exceed its configured budget.
class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace krondim
