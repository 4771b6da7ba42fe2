#include "covdetect/core.hpp"

#include <algorithm>
#include <cmath>

namespace covdetect {

CMatrix EigenSystem::reconstruct() const {
  return vectors * values.cast<Complex>().asDiagonal() * vectors.adjoint();
}

EigenSystem hermitian_eigen(const CMatrix& a) {
  if (a.rows() != a.cols()) {
    throw InvalidConfiguration("hermitian_eigen: matrix is not square");
  }
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(hermitian_part(a));
  if (solver.info() != Eigen::Success) {
    throw NumericalDomainError("hermitian_eigen: eigensolver did not converge");
  }
  // Eigen sorts ascending.
  EigenSystem out;
  out.values = solver.eigenvalues().reverse();
  out.vectors = solver.eigenvectors().rowwise().reverse();
  return out;
}

bool is_hermitian(const CMatrix& a, double rel_tol) {
  if (a.rows() != a.cols()) return false;
  const double scale = a.cwiseAbs().maxCoeff();
  if (scale == 0.0) return true;
  return (a - a.adjoint()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

bool is_psd(const CMatrix& a, double rel_tol) {
  if (!is_hermitian(a, 1e-10)) return false;
  if (a.size() == 0) return true;
  const RVector ev = Eigen::SelfAdjointEigenSolver<CMatrix>(hermitian_part(a), Eigen::EigenvaluesOnly).eigenvalues();
  const double top = std::max(ev.maxCoeff(), 0.0);
  return ev.minCoeff() >= -rel_tol * top;
}

CMatrix project_psd(const CMatrix& a) {
  EigenSystem es = hermitian_eigen(a);
  if (es.values.size() == 0 || es.values.minCoeff() >= 0.0) return hermitian_part(a);
  es.values = es.values.cwiseMax(0.0);
  return hermitian_part(es.reconstruct());
}

CMatrix hermitian_sqrt(const CMatrix& a) {
  EigenSystem es = hermitian_eigen(a);
  es.values = es.values.cwiseMax(0.0).cwiseSqrt();
  return es.reconstruct();
}

PdFactor::PdFactor(const CMatrix& a) : llt_(hermitian_part(a)) {
  if (llt_.info() != Eigen::Success) {
    throw NumericalDomainError("matrix is not positive definite");
  }
  const RVector diag = llt_.matrixLLT().diagonal().real();
  const double top = diag.cwiseAbs().maxCoeff();
  if (!(diag.minCoeff() > 1e-150) || diag.minCoeff() < 1e-8 * top) {
    throw NumericalDomainError("matrix is numerically singular");
  }
  log_det_ = 2.0 * diag.array().log().sum();
}

CMatrix PdFactor::inverse() const {
  return llt_.solve(CMatrix::Identity(size(), size()));
}

double PdFactor::trace_solve(const CMatrix& b) const {
  return llt_.solve(b).trace().real();
}

bool nearly_equal(const CMatrix& a, const CMatrix& b, double rel_tol) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  const double scale = std::max({a.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff(), 1e-300});
  return (a - b).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

}  // namespace covdetect
