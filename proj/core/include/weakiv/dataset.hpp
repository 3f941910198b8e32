#pragma once

#include <optional>

#include <Eigen/Dense>

namespace weakiv {

// Observation matrices for a linear IV model
//
//   y = X beta + u,   X = Z Pi + V,
//
// with n observations, k_x endogenous regressors and k_z instruments.
// Overidentification (k_z > k_x) is required throughout: the test statistics
// this library exists for are undefined in the just-identified case.
//
// Exogenous controls (including any intercept column) are not implicit;
// supply them in X_exog and call partial_out().
struct IVDataset {
  Eigen::VectorXd y;
  Eigen::MatrixXd X;
  Eigen::MatrixXd Z;
  std::optional<Eigen::MatrixXd> X_exog;

  Eigen::Index n_obs() const { return y.size(); }
  Eigen::Index k_x() const { return X.cols(); }
  Eigen::Index k_z() const { return Z.cols(); }
};

// Checks all dataset invariants: conformable shapes, n > k_z > k_x >= 1,
// finite entries, and full column rank of Z and X at the relative
// singular-value tolerance. Throws DimensionError / NonFiniteError /
// RankError.
void validate(const IVDataset& dataset);

// Residualizes y, X and Z on X_exog (least squares) and drops X_exog.
// Requires X_exog present with full column rank and n > k_z + k_e.
// Throws RankError if X_exog is rank deficient or if the residualized Z
// loses column rank.
IVDataset partial_out(const IVDataset& dataset);

// Replaces Z by Z T where T is the inverse of the upper-triangular Cholesky
// factor (positive diagonal) of Z'Z/n, so that Z'Z/n = I afterwards.
// 2SLS, LIML and the overidentification statistics are invariant to this
// transformation.
IVDataset orthonormalize(const IVDataset& dataset);

}  // namespace weakiv
