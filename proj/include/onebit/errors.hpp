#pragma once

#include <stdexcept>
#include <string>

namespace onebit {

// All library failures derive from Error so callers can catch one type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shapes that do not line up (empty pilots, mismatched vector lengths, ...).
class DimensionError : public Error {
 public:
  using Error::Error;
};

// An argument outside the mathematical domain of the operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

// A matrix that must be inverted is singular or too badly conditioned.
class SingularityError : public Error {
 public:
  using Error::Error;
};

// A configuration does not satisfy the assumptions of a closed form.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// The request exceeds what the numeric engines support.
class CapabilityError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Raised when a numeric integration exhausts its sample budget before
// meeting the requested tolerance.
class AccuracyError : public Error {
 public:
  AccuracyError(const std::string& what, double achieved_error, double requested_error)
      : Error(what), achieved_(achieved_error), requested_(requested_error) {}

  double achieved_error() const noexcept { return achieved_; }
  double requested_error() const noexcept { return requested_; }

 private:
  double achieved_;
  double requested_;
};

}  // namespace onebit
