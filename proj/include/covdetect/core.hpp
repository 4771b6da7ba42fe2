#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace covdetect {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Inconsistent dimensions, out-of-range parameters, malformed config files.
class InvalidConfiguration : public Error {
 public:
  using Error::Error;
};

/// C0 and C1 coincide, so the change test carries no information.
class DegenerateHypotheses : public InvalidConfiguration {
 public:
  using InvalidConfiguration::InvalidConfiguration;
};

/// Singular or indefinite matrices where a positive definite one is needed.
class NumericalDomainError : public Error {
 public:
  using Error::Error;
};

/// The covariance model produced a matrix too far from PSD to repair.
class ModelFidelityError : public NumericalDomainError {
 public:
  using NumericalDomainError::NumericalDomainError;
};

class ConvergenceError : public NumericalDomainError {
 public:
  using NumericalDomainError::NumericalDomainError;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Eigendecomposition of a Hermitian matrix with eigenvalues sorted in
/// descending order. `vectors.col(i)` pairs with `values(i)`.
struct EigenSystem {
  CMatrix vectors;
  RVector values;

  [[nodiscard]] Eigen::Index size() const { return values.size(); }
  /// vectors * diag(values) * vectors^H
  [[nodiscard]] CMatrix reconstruct() const;
};

[[nodiscard]] EigenSystem hermitian_eigen(const CMatrix& a);

/// (A + A^H) / 2
template <typename Derived>
[[nodiscard]] CMatrix hermitian_part(const Eigen::MatrixBase<Derived>& a) {
  CMatrix m = a;
  return (m + m.adjoint()) / 2.0;
}

/// Hermitian to within `rel_tol` of the largest entry magnitude.
[[nodiscard]] bool is_hermitian(const CMatrix& a, double rel_tol = 1e-12);

/// Hermitian and min eigenvalue >= -rel_tol * max eigenvalue.
[[nodiscard]] bool is_psd(const CMatrix& a, double rel_tol = 1e-10);

/// Floors negative eigenvalues at zero. Input is symmetrized first.
[[nodiscard]] CMatrix project_psd(const CMatrix& a);

/// Principal square root of a Hermitian PSD matrix; negative eigenvalues are
/// floored at zero.
[[nodiscard]] CMatrix hermitian_sqrt(const CMatrix& a);

/// Cholesky factorization of a Hermitian positive definite matrix.
/// Throws NumericalDomainError if the matrix is not numerically PD.
class PdFactor {
 public:
  explicit PdFactor(const CMatrix& a);

  [[nodiscard]] double log_det() const { return log_det_; }
  [[nodiscard]] CMatrix solve(const CMatrix& b) const { return llt_.solve(b); }
  [[nodiscard]] CMatrix inverse() const;
  /// tr(A^{-1} B)
  [[nodiscard]] double trace_solve(const CMatrix& b) const;
  [[nodiscard]] Eigen::Index size() const { return llt_.rows(); }

 private:
  Eigen::LLT<CMatrix> llt_;
  double log_det_ = 0.0;
};

/// Largest absolute entry difference, relative to the larger operand scale.
[[nodiscard]] bool nearly_equal(const CMatrix& a, const CMatrix& b, double rel_tol);

}  // namespace covdetect
