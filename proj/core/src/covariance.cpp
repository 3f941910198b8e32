#include "weakiv/covariance.hpp"

#include <string>

#include "weakiv/errors.hpp"

namespace weakiv {

using Eigen::MatrixXd;
using Eigen::VectorXd;

MatrixXd meat(const MatrixXd& Z, const VectorXd& u, const CovarianceSpec& spec) {
  const auto n = Z.rows();
  const auto k = Z.cols();
  if (u.size() != n) throw DimensionError("residual length must match rows of Z");
  if (n <= k) throw DimensionError("need n > k in meat()");
  if (spec.kind == CovarianceSpec::Kind::NeweyWest && spec.lags < 0)
    throw DimensionError("Newey-West lag count must be nonnegative");
  if (spec.kind == CovarianceSpec::Kind::HC1 && spec.hc1_params >= n)
    throw DimensionError("HC1 correction requires hc1_params < n");

  MatrixXd S(k, k);
  switch (spec.kind) {
    case CovarianceSpec::Kind::Homoskedastic:
      S = (u.squaredNorm() / static_cast<double>(n)) * (Z.transpose() * Z);
      break;
    case CovarianceSpec::Kind::HC0:
    case CovarianceSpec::Kind::HC1: {
      // Row-scaling by u_i makes the Gram matrix sum u_i^2 z_i z_i' (PSD by
      // construction).
      MatrixXd Zu = u.asDiagonal() * Z;
      S = Zu.transpose() * Zu;
      if (spec.kind == CovarianceSpec::Kind::HC1)
        S *= static_cast<double>(n) / static_cast<double>(n - spec.hc1_params);
      break;
    }
    case CovarianceSpec::Kind::NeweyWest: {
      MatrixXd Zu = u.asDiagonal() * Z;
      S = Zu.transpose() * Zu;  // Gamma_0
      const int L = spec.lags;
      for (int l = 1; l <= L; ++l) {
        if (l >= n) break;
        const double w = 1.0 - static_cast<double>(l) / static_cast<double>(L + 1);
        // Gamma_l = sum_{t >= l} u_t u_{t-l} z_t z_{t-l}'
        MatrixXd G = Zu.bottomRows(n - l).transpose() * Zu.topRows(n - l);
        S += w * (G + G.transpose());
      }
      break;
    }
  }
  return 0.5 * (S + S.transpose());
}

}  // namespace weakiv
