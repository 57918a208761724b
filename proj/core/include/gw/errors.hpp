#pragma once

#include <stdexcept>
#include <string>

namespace gw {

// Base class for everything this library throws on its own behalf.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input matrix expected to be symmetric is not (beyond the relative
// symmetry tolerance).
class NonSymmetricInput : public Error {
 public:
  using Error::Error;
};

// Block sizes or vector lengths do not line up.
class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

// A determinant underflowed or a matrix that must be invertible is not.
class SingularMatrix : public Error {
 public:
  using Error::Error;
};

// A conditional covariance factor is numerically singular where the
// mutual-information formula needs it positive definite.
class SingularConditional : public Error {
 public:
  using Error::Error;
};

// Empirical covariance too degenerate for the plug-in estimator.
class SingularEmpirical : public Error {
 public:
  using Error::Error;
};

// Distortion budget is non-positive or otherwise unusable.
class InvalidDistortion : public Error {
 public:
  using Error::Error;
};

// The auxiliary-variable parameters are inconsistent with the source:
// the implied conditional covariance fails to be positive semidefinite.
class InfeasibleAux : public Error {
 public:
  using Error::Error;
};

// A conditional-independence factorization does not reproduce the
// cross-covariance, or leaves a conditional block indefinite.
class InfeasibleFactorization : public Error {
 public:
  using Error::Error;
};

// Error covariance handed to a test-channel builder does not commute
// with (or fit inside) the conditional covariance it is meant to shape.
class IncompatibleErrorCov : public Error {
 public:
  using Error::Error;
};

// An iterative solver exhausted its budget with the optimality residual
// still above tolerance.
class NonConvergence : public Error {
 public:
  using Error::Error;
};

}  // namespace gw
