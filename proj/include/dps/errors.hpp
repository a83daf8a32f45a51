#pragma once

#include <stdexcept>
#include <string>

namespace dps {

/// Base class for every failure raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Load rho >= 1 (or a per-resource load >= 1 in the network model).
class InstabilityError : public Error {
 public:
  using Error::Error;
};

/// The waiting-time linear system could not be solved reliably.
/// Valid inputs never produce this; treat it as a bug-level diagnostic.
class SingularSystemError : public Error {
 public:
  using Error::Error;
};

/// A 1-D minimizer ended on an endpoint of the priority search interval.
class BracketExhaustedError : public Error {
 public:
  BracketExhaustedError(const std::string& what, double location)
      : Error(what), location_(location) {}
  double location() const { return location_; }

 private:
  double location_;
};

class QuadratureError : public Error {
 public:
  using Error::Error;
};

/// A theorem hypothesis required by the requested computation does not hold.
class HypothesisError : public Error {
 public:
  using Error::Error;
};

class NonConvergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace dps
