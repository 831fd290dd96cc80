#pragma once

#include <stdexcept>
#include <string>

namespace ltc {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A documented precondition of an operation does not hold.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// An exact division failed: the dividend is known to have too small a
/// valuation. `degree` names the failing series coefficient when relevant.
class DivisibilityError : public Error {
 public:
  explicit DivisibilityError(const std::string& what, int degree = -1)
      : Error(what), degree_(degree) {}
  int degree() const noexcept { return degree_; }

 private:
  int degree_;
};

/// The requested result cannot be delivered within the degree/precision
/// budget that was supplied.
class BudgetError : public Error {
 public:
  using Error::Error;
};

/// An identity that must hold by construction failed (e.g. a non-rational
/// residue after a symmetric sum). Signals a bug or a budget breach.
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

/// A successive-approximation loop stopped gaining valuation.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// Malformed configuration or serialized data.
class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace ltc
