#include "weakiv/linalg.hpp"

#include <algorithm>
#include <cmath>

#include "weakiv/errors.hpp"

namespace weakiv {

bool has_full_column_rank(const MatrixXd& A, double tol) {
  if (A.rows() < A.cols()) return false;
  Eigen::JacobiSVD<MatrixXd> svd(A);
  const auto& s = svd.singularValues();
  if (s.size() == 0) return false;
  return s(s.size() - 1) > tol * s(0);
}

double sv_ratio(const MatrixXd& A) {
  Eigen::JacobiSVD<MatrixXd> svd(A);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0.0;
  return s(s.size() - 1) / s(0);
}

MatrixXd sym_inverse_sqrt(const MatrixXd& A, double tol) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(A);
  if (es.info() != Eigen::Success) throw ConvergenceError("eigendecomposition failed");
  const VectorXd& ev = es.eigenvalues();
  double emax = ev(ev.size() - 1);
  if (emax <= 0.0 || ev(0) <= tol * emax)
    throw SingularityError("matrix not positive definite in sym_inverse_sqrt");
  VectorXd inv_sqrt = ev.array().rsqrt();
  return es.eigenvectors() * inv_sqrt.asDiagonal() * es.eigenvectors().transpose();
}

namespace {
Eigen::LLT<MatrixXd> checked_llt(const MatrixXd& S) {
  Eigen::LLT<MatrixXd> llt(S);
  if (llt.info() != Eigen::Success)
    throw SingularityError("Cholesky factorization failed (matrix not positive definite)");
  return llt;
}
}  // namespace

VectorXd chol_solve(const MatrixXd& S, const VectorXd& b) { return checked_llt(S).solve(b); }

MatrixXd chol_solve(const MatrixXd& S, const MatrixXd& B) { return checked_llt(S).solve(B); }

double quad_form_inv(const MatrixXd& S, const VectorXd& x) {
  double v = x.dot(chol_solve(S, x));
  return std::max(v, 0.0);
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw DomainError("quantile of empty sample");
  q = std::clamp(q, 0.0, 1.0);
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(pos);
  const auto hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] * (1.0 - frac) + values[hi] * frac;
}

double median(std::vector<double> values) { return quantile(std::move(values), 0.5); }

}  // namespace weakiv
