#pragma once

#include <stdexcept>
#include <string>

namespace cdft {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input fields live on different grids.
class GridMismatch : public Error {
 public:
  using Error::Error;
};

/// Operation needs a different spatial dimension (e.g. curl on a 1D field).
class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// Bad argument (weights outside the simplex, lambda outside [0,1], ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Numerical failures. The CLI maps all of these to exit status 2.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Vector field is not a gradient to within the curl tolerance.
class CurlTooLarge : public NumericalError {
 public:
  CurlTooLarge(double max_curl, double tol)
      : NumericalError("curl max-norm " + std::to_string(max_curl) +
                       " exceeds tolerance " + std::to_string(tol)),
        max_curl_(max_curl),
        tol_(tol) {}
  double max_curl() const { return max_curl_; }
  double tolerance() const { return tol_; }

 private:
  double max_curl_;
  double tol_;
};

/// The two axis orderings of a line integral disagree.
class PathMismatch : public NumericalError {
 public:
  PathMismatch(double discrepancy, double tol)
      : NumericalError("path-order discrepancy " + std::to_string(discrepancy) +
                       " exceeds tolerance " + std::to_string(tol)),
        discrepancy_(discrepancy) {}
  double discrepancy() const { return discrepancy_; }

 private:
  double discrepancy_;
};

/// Current density is non-negligible where the particle density vanishes.
class UnsupportedCurrent : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NonConvergence : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class DegenerateGroundState : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// A pair failed N-representability checks where a member was required.
class ValidationFailed : public Error {
 public:
  using Error::Error;
};

/// File, manifest or scenario could not be read or parsed.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace cdft
