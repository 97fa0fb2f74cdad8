#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace nhxy {

template <typename Real>
using Complex = std::complex<Real>;

template <typename Real>
using CMatrix = Eigen::Matrix<Complex<Real>, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Real>
using CVector = Eigen::Matrix<Complex<Real>, Eigen::Dynamic, 1>;

using cd = std::complex<double>;
using MatrixXcd = CMatrix<double>;
using VectorXcd = CVector<double>;

// Error hierarchy. Every numerical failure the library can detect is reported
// through one of these; callers that sweep parameters catch `Error` and flag
// the cell instead of aborting.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input outside an operation's precondition (bad size, bad range, zero step).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// Problem too large for the dense representation or enumeration cap.
class ResourceError : public Error {
 public:
  using Error::Error;
};

class UnsupportedBoundaryError : public Error {
 public:
  using Error::Error;
};

// Generic numerical breakdown (non-convergence, underflow, impossible state).
class NumericalError : public Error {
 public:
  using Error::Error;
};

// Eigenvector pairing is ambiguous or the eigenbasis is (numerically)
// defective. Carries the eigenvalue cluster where it happened.
class ExceptionalPointError : public NumericalError {
 public:
  ExceptionalPointError(const std::string& what, std::vector<cd> cluster)
      : NumericalError(what), cluster_(std::move(cluster)) {}

  const std::vector<cd>& cluster() const noexcept { return cluster_; }

 private:
  std::vector<cd> cluster_;
};

class DefectiveMatrixError : public ExceptionalPointError {
 public:
  using ExceptionalPointError::ExceptionalPointError;
};

// Bloch vector vanishes somewhere in the Brillouin zone.
class GaplessPointError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// Adaptive grid refinement could not resolve a phase winding.
class RefinementError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class UndefinedRatioError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class FitError : public Error {
 public:
  using Error::Error;
};

// Short machine-readable tag for an error, used in the flag column of scans.
inline const char* error_code(const Error& e) {
  if (dynamic_cast<const GaplessPointError*>(&e)) return "gapless";
  if (dynamic_cast<const DefectiveMatrixError*>(&e)) return "defective";
  if (dynamic_cast<const ExceptionalPointError*>(&e)) return "exceptional_point";
  if (dynamic_cast<const RefinementError*>(&e)) return "refinement";
  if (dynamic_cast<const UndefinedRatioError*>(&e)) return "undefined_ratio";
  if (dynamic_cast<const ResourceError*>(&e)) return "resource";
  if (dynamic_cast<const PreconditionError*>(&e)) return "precondition";
  if (dynamic_cast<const FitError*>(&e)) return "fit";
  if (dynamic_cast<const NumericalError*>(&e)) return "numerical";
  return "error";
}

}  // namespace nhxy
