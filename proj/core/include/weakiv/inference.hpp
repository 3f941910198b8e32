#pragma once

#include <vector>

#include <Eigen/Dense>

#include "weakiv/covariance.hpp"
#include "weakiv/dataset.hpp"
#include "weakiv/estimators.hpp"

namespace weakiv {

enum class TestKind { HansenJ, RobustScore2SLS, RobustScoreLIML, KP, Sargan, EffectiveF };

struct TestResult {
  double statistic = 0.0;
  int df = 0;
  double p_value = 1.0;  // upper-tail chi-square; unset (quiet 1.0) for EffectiveF
  TestKind test = TestKind::HansenJ;
  std::vector<int> partition_cols;  // columns of Z used as Z2, empty if not applicable
};

// Hansen J = u2' Z (meat(Z, u1, spec))^{-1} Z' u2 with first-step residuals
// u1 and second-step residuals u2, df = k_z - k_x.
TestResult j_test(const IVDataset& dataset, const EstimationResult& first_step,
                  const EstimationResult& second_step, const CovarianceSpec& spec);

// Standard pipeline: 2SLS first step, meat from its residuals, two-step GMM
// second step, then j_test.
TestResult hansen_j(const IVDataset& dataset, const CovarianceSpec& spec);

// One-step robust score test of theta = 0 in y = X beta + Z2 theta + eta:
//   S_r = u' M_X^ Z2 (Z2' M_X^ H_u M_X^ Z2)^{-1} Z2' M_X^ u
// with X^ = Z pi_hat from the supplied estimate. partition lists the columns
// of Z assigned to Z2 (the k_z - k_x overidentifying instruments); the
// remaining columns must leave the corresponding rows of pi_hat invertible.
// Numerically identical to j_test when the estimate is 2SLS, for any
// partition.
TestResult robust_score(const IVDataset& dataset, const EstimationResult& estimate,
                        const CovarianceSpec& spec, const std::vector<int>& partition);

// Default partition: Z2 = last k_z - k_x columns, rotated until the
// just-identifying block of pi_hat is invertible.
TestResult robust_score(const IVDataset& dataset, const EstimationResult& estimate,
                        const CovarianceSpec& spec);

// Kleibergen-Paap rank-based overidentification statistic: the robust score
// test evaluated at the LIML estimate and its first stage. Invariant to
// which endogenous variable is treated as the outcome when k_x = 1.
TestResult kp_test(const IVDataset& dataset, const CovarianceSpec& spec);

// Homoskedastic Sargan statistic u'Pz u / (u'u/n).
TestResult sargan_test(const IVDataset& dataset, const EstimationResult& estimate);

// Effective first-stage F statistic of Montiel Olea & Pflueger (2013) for a
// single endogenous regressor, with its simplified conservative critical
// value kappa at worst-case relative bias tau:
//   F_eff = x'Pz x / tr[(Z'Z)^{-1} meat(Z, v_hat, spec)]
//   kappa = quantile(ncx2(K_eff, K_eff / tau), 1 - level) / K_eff
// where K_eff are the effective degrees of freedom computed from the robust
// first-stage covariance. result.df = k_z; result.p_value is not defined for
// this statistic and is left at 1.
struct EffectiveFResult {
  TestResult result;
  double kappa = 0.0;
  double k_eff = 0.0;
};
EffectiveFResult effective_f(const IVDataset& dataset, const CovarianceSpec& spec,
                             double tau = 0.10, double level = 0.05);

// Concentration matrix mu^2 = k_z V^{-1/2} Pi' Z'Z Pi V^{-1/2} with
// V = R' (Omega_ZV kron Qzz^{-1}) R and R = I_{k_x} kron vec(I_{k_z}).
// omega_zv is E[v v' kron z z'] laid out in k_z x k_z blocks.
struct ConcentrationResult {
  Eigen::MatrixXd mu2;   // k_x x k_x, positive semidefinite
  Eigen::MatrixXd v_zv;  // k_x x k_x
};
ConcentrationResult concentration(const Eigen::MatrixXd& Pi, const Eigen::MatrixXd& ZtZ,
                                  const Eigen::MatrixXd& omega_zv,
                                  const Eigen::MatrixXd& qzz_inv);

}  // namespace weakiv
