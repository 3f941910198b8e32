#pragma once

#include <Eigen/Dense>

#include "weakiv/dataset.hpp"

namespace weakiv {

enum class Method { TwoSLS, LIML, KClass, GMM2 };

struct EstimationResult {
  Eigen::VectorXd beta_hat;   // structural coefficients, length k_x
  double alpha = 0.0;         // k-class alpha: 0 for 2SLS, smallest eigenvalue for LIML
  Eigen::VectorXd residuals;  // y - X beta_hat
  Eigen::MatrixXd pi_hat;     // first-stage coefficients matched to the estimator, k_z x k_x
  Method method = Method::TwoSLS;
};

// k-class estimator beta(alpha) = (X'PzX - a X'X)^{-1} (X'Pzy - a X'y).
// pi_hat is the OLS first stage (Z'Z)^{-1} Z'X. alpha = 0 is labeled TwoSLS.
EstimationResult estimate_kclass(const IVDataset& dataset, double alpha);

EstimationResult estimate_2sls(const IVDataset& dataset);

// LIML: alpha is the smallest generalized eigenvalue of (W'PzW, W'W) with
// W = [y X], solved by Cholesky reduction to a symmetric eigenproblem and
// clamped to [0, 1]. pi_hat is the LIML first stage
// (Z'M_u Z)^{-1} Z'M_u X built from the LIML residuals.
EstimationResult estimate_liml(const IVDataset& dataset);

// Two-step GMM with first-stage coefficients from first_step and weighting
// by the inverse of the supplied meat matrix:
//   beta_2 = (Pi_1' Z'Z meat^{-1} Z'X)^{-1} Pi_1' Z'Z meat^{-1} Z'y.
EstimationResult estimate_gmm2(const IVDataset& dataset, const EstimationResult& first_step,
                               const Eigen::MatrixXd& meat);

}  // namespace weakiv
