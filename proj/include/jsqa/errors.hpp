#pragma once

#include <stdexcept>
#include <string>

namespace jsqa {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of a closed form (e.g. an MGF
/// evaluated beyond its radius of convergence).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A derived parameter lands outside its admissible range.
class OutOfRangeError : public Error {
 public:
  using Error::Error;
};

class ResourceLimitError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class RegimeMismatchError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  using Error::Error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

}  // namespace jsqa
