#include "weakiv/estimators.hpp"

#include <algorithm>
#include <cmath>

#include "weakiv/errors.hpp"
#include "weakiv/linalg.hpp"

namespace weakiv {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

struct CrossProducts {
  MatrixXd ZtZ;     // k_z x k_z
  MatrixXd ZtX;     // k_z x k_x
  VectorXd Zty;     // k_z
  MatrixXd XtPzX;   // k_x x k_x
  VectorXd XtPzy;   // k_x
  MatrixXd pi_ols;  // (Z'Z)^{-1} Z'X
};

CrossProducts cross_products(const IVDataset& d) {
  CrossProducts cp;
  cp.ZtZ = d.Z.transpose() * d.Z;
  cp.ZtX = d.Z.transpose() * d.X;
  cp.Zty = d.Z.transpose() * d.y;
  Eigen::LLT<MatrixXd> llt(cp.ZtZ);
  if (llt.info() != Eigen::Success) throw SingularityError("Z'Z is not positive definite");
  cp.pi_ols = llt.solve(cp.ZtX);
  cp.XtPzX = cp.ZtX.transpose() * cp.pi_ols;
  cp.XtPzy = cp.pi_ols.transpose() * cp.Zty;
  return cp;
}

VectorXd solve_kclass_bracket(const IVDataset& d, const CrossProducts& cp, double alpha) {
  MatrixXd A = cp.XtPzX;
  VectorXd b = cp.XtPzy;
  if (alpha != 0.0) {
    A -= alpha * (d.X.transpose() * d.X);
    b -= alpha * (d.X.transpose() * d.y);
  }
  if (sv_ratio(A) <= kRankTolerance)
    throw SingularityError("k-class bracket X'PzX - alpha X'X is near singular");
  return A.ldlt().solve(b);
}

}  // namespace

EstimationResult estimate_kclass(const IVDataset& dataset, double alpha) {
  validate(dataset);
  CrossProducts cp = cross_products(dataset);
  EstimationResult r;
  r.beta_hat = solve_kclass_bracket(dataset, cp, alpha);
  r.alpha = alpha;
  r.residuals = dataset.y - dataset.X * r.beta_hat;
  r.pi_hat = cp.pi_ols;
  r.method = (alpha == 0.0) ? Method::TwoSLS : Method::KClass;
  return r;
}

EstimationResult estimate_2sls(const IVDataset& dataset) { return estimate_kclass(dataset, 0.0); }

EstimationResult estimate_liml(const IVDataset& dataset) {
  validate(dataset);
  CrossProducts cp = cross_products(dataset);
  const auto n = dataset.n_obs();

  MatrixXd W(n, dataset.k_x() + 1);
  W.col(0) = dataset.y;
  W.rightCols(dataset.k_x()) = dataset.X;
  MatrixXd ZtW = dataset.Z.transpose() * W;
  Eigen::LLT<MatrixXd> lltZ(cp.ZtZ);
  MatrixXd A = ZtW.transpose() * lltZ.solve(ZtW);  // W'PzW
  MatrixXd B = W.transpose() * W;

  Eigen::GeneralizedSelfAdjointEigenSolver<MatrixXd> ges;
  ges.compute(A, B, Eigen::Ax_lBx | Eigen::ComputeEigenvectors);
  if (ges.info() != Eigen::Success) {
    // Distinguish an indefinite B (singular W'W) from solver failure.
    Eigen::LLT<MatrixXd> lltB(B);
    if (lltB.info() != Eigen::Success) throw SingularityError("W'W is not positive definite");
    throw ConvergenceError("generalized eigensolver failed for (W'PzW, W'W)");
  }
  // Pz is a projection, so the exact eigenvalue lies in [0, 1]; clamp
  // round-off excursions.
  double alpha = std::clamp(ges.eigenvalues()(0), 0.0, 1.0);

  EstimationResult r;
  r.beta_hat = solve_kclass_bracket(dataset, cp, alpha);
  r.alpha = alpha;
  r.residuals = dataset.y - dataset.X * r.beta_hat;
  r.method = Method::LIML;

  // Pi_L = (Z'M_u Z)^{-1} Z'M_u X with M_u = I - u(u'u)^{-1}u'.
  const VectorXd& u = r.residuals;
  const double uu = u.squaredNorm();
  if (uu <= 1e-12 * dataset.y.squaredNorm())
    throw SingularityError("LIML residual quadratic form vanishes");
  VectorXd Ztu = dataset.Z.transpose() * u;
  MatrixXd ZMuZ = cp.ZtZ - (Ztu * Ztu.transpose()) / uu;
  MatrixXd ZMuX = cp.ZtX - Ztu * (u.transpose() * dataset.X) / uu;
  Eigen::LLT<MatrixXd> lltM(ZMuZ);
  if (lltM.info() != Eigen::Success)
    throw SingularityError("Z'M_u Z is not positive definite in LIML first stage");
  r.pi_hat = lltM.solve(ZMuX);
  return r;
}

EstimationResult estimate_gmm2(const IVDataset& dataset, const EstimationResult& first_step,
                               const MatrixXd& meat) {
  validate(dataset);
  const auto kz = dataset.k_z();
  if (meat.rows() != kz || meat.cols() != kz)
    throw DimensionError("meat must be k_z x k_z");
  if (!meat.isApprox(meat.transpose(), 1e-8)) throw DimensionError("meat must be symmetric");
  if (first_step.pi_hat.rows() != kz || first_step.pi_hat.cols() != dataset.k_x())
    throw DimensionError("first_step.pi_hat must be k_z x k_x");

  Eigen::LLT<MatrixXd> llt(meat);
  if (llt.info() != Eigen::Success) throw SingularityError("meat matrix is not positive definite");

  MatrixXd ZtZ = dataset.Z.transpose() * dataset.Z;
  MatrixXd ZtX = dataset.Z.transpose() * dataset.X;
  VectorXd Zty = dataset.Z.transpose() * dataset.y;
  MatrixXd G = first_step.pi_hat.transpose() * ZtZ;  // k_x x k_z
  MatrixXd A = G * llt.solve(ZtX);
  VectorXd b = G * llt.solve(Zty);
  if (sv_ratio(A) <= kRankTolerance) throw SingularityError("GMM bracket is near singular");

  EstimationResult r;
  r.beta_hat = A.lu().solve(b);
  r.alpha = 0.0;
  r.residuals = dataset.y - dataset.X * r.beta_hat;
  r.pi_hat = first_step.pi_hat;
  r.method = Method::GMM2;
  return r;
}

}  // namespace weakiv
