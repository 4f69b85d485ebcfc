#pragma once

#include <stdexcept>
#include <string>

namespace netbound {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument violates a documented precondition (shape, sign, range).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// An iterative numerical routine hit its iteration cap.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// A modelling assumption of the analysis does not hold for the given data
/// (graph connectivity, M-matrix structure, unbounded K-infinity function).
class AssumptionError : public Error {
 public:
  using Error::Error;
};

/// A function evaluation returned NaN or infinity.
class NonFiniteError : public Error {
 public:
  NonFiniteError(const std::string& what, double at)
      : Error(what), at_(at) {}
  double at() const { return at_; }

 private:
  double at_;
};

}  // namespace netbound
