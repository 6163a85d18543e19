#pragma once

#include <stdexcept>
#include <string>

namespace l1lab {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of a function.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Norm vector for which the loop-closure exponent is not defined.
class InfeasibleNorms : public Error {
 public:
  using Error::Error;
};

/// Second derivative requested where some R_t >= 1/2.
class DegenerateHessian : public Error {
 public:
  using Error::Error;
};

/// Iterative solver exhausted its budget without meeting tolerance.
class NonConvergence : public Error {
 public:
  using Error::Error;
};

/// Density profile evaluated outside [0,1] or otherwise malformed.
class InvalidProfile : public Error {
 public:
  using Error::Error;
};

/// Least-squares fit without enough distinct abscissae.
class IllConditioned : public Error {
 public:
  using Error::Error;
};

/// Basis-pursuit solve that did not reach an optimal status.
class SolverFailure : public Error {
 public:
  using Error::Error;
};

/// Malformed or truncated file.
class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace l1lab
