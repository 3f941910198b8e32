#pragma once

#include <vector>

#include <Eigen/Dense>

namespace weakiv {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// A matrix is treated as rank-deficient when its smallest singular value is
// below kRankTolerance times its largest (scale-free criterion).
inline constexpr double kRankTolerance = 1e-10;

// True iff A has full column rank at the relative SV tolerance.
bool has_full_column_rank(const MatrixXd& A, double tol = kRankTolerance);

// Relative reciprocal condition number sigma_min/sigma_max (0 for empty A).
double sv_ratio(const MatrixXd& A);

// Symmetric inverse square root of a positive definite matrix.
// Throws SingularityError if an eigenvalue is below tol * max eigenvalue.
MatrixXd sym_inverse_sqrt(const MatrixXd& A, double tol = kRankTolerance);

// Solves S x = b for symmetric positive definite S via Cholesky.
// Throws SingularityError if the factorization fails; no pseudo-inverse
// fallback (a silent pseudo-inverse would change test distributions).
VectorXd chol_solve(const MatrixXd& S, const VectorXd& b);
MatrixXd chol_solve(const MatrixXd& S, const MatrixXd& B);

// x' S^{-1} x for symmetric positive definite S, clamped to [0, inf).
double quad_form_inv(const MatrixXd& S, const VectorXd& x);

// Linear-interpolation quantile (numpy default) of an unsorted sample.
double quantile(std::vector<double> values, double q);
double median(std::vector<double> values);

}  // namespace weakiv
