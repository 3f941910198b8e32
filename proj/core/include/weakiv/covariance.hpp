#pragma once

#include <Eigen/Dense>

namespace weakiv {

// Inner "meat" matrix of sandwich covariance estimators built from moment
// columns Z and residuals u: homoskedastic (u'u/n) Z'Z, heteroskedasticity-
// consistent HC0/HC1, and Bartlett-kernel Newey-West HAC sums.
struct CovarianceSpec {
  enum class Kind { Homoskedastic, HC0, HC1, NeweyWest };

  Kind kind = Kind::HC0;
  int lags = 0;         // Newey-West only, L >= 0
  int hc1_params = 1;   // HC1 small-sample correction n/(n - hc1_params)

  static CovarianceSpec homoskedastic() { return {Kind::Homoskedastic, 0, 1}; }
  static CovarianceSpec hc0() { return {Kind::HC0, 0, 1}; }
  static CovarianceSpec hc1(int n_params) { return {Kind::HC1, 0, n_params}; }
  static CovarianceSpec newey_west(int lags) { return {Kind::NeweyWest, lags, 1}; }
};

// k x k meat matrix:
//   Homoskedastic:  (u'u/n) Z'Z
//   HC0:            sum_i u_i^2 z_i z_i'
//   HC1:            n/(n - hc1_params) x HC0
//   NeweyWest(L):   Gamma_0 + sum_{l=1..L} (1 - l/(L+1)) (Gamma_l + Gamma_l')
//                   with Gamma_l = sum_{t>l} u_t u_{t-l} z_t z_{t-l}'
// Raw sums, no degrees-of-freedom correction for Newey-West. The result is
// symmetrized by averaging with its transpose.
Eigen::MatrixXd meat(const Eigen::MatrixXd& Z, const Eigen::VectorXd& residuals,
                     const CovarianceSpec& spec);

}  // namespace weakiv
