#include "weakiv/inference.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "weakiv/distributions.hpp"
#include "weakiv/errors.hpp"
#include "weakiv/linalg.hpp"

namespace weakiv {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

double clamp_stat(double s) { return (s > -1e-10 && s < 0.0) ? 0.0 : std::max(s, 0.0); }

TestResult make_result(double stat, int df, TestKind kind, std::vector<int> partition = {}) {
  TestResult r;
  r.statistic = clamp_stat(stat);
  r.df = df;
  r.p_value = chi2_sf(r.statistic, df);
  r.test = kind;
  r.partition_cols = std::move(partition);
  return r;
}

// Columns of Z not in the partition, in ascending order.
std::vector<int> complement_indices(int k_z, const std::vector<int>& partition) {
  std::vector<bool> in(k_z, false);
  for (int c : partition) in[static_cast<std::size_t>(c)] = true;
  std::vector<int> rest;
  for (int c = 0; c < k_z; ++c)
    if (!in[static_cast<std::size_t>(c)]) rest.push_back(c);
  return rest;
}

MatrixXd select_columns(const MatrixXd& A, const std::vector<int>& cols) {
  MatrixXd out(A.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = A.col(cols[j]);
  return out;
}

MatrixXd select_rows(const MatrixXd& A, const std::vector<int>& rows) {
  MatrixXd out(static_cast<Eigen::Index>(rows.size()), A.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = A.row(rows[i]);
  return out;
}

void check_partition(const IVDataset& d, const std::vector<int>& partition) {
  const int kz = static_cast<int>(d.k_z());
  const int expected = kz - static_cast<int>(d.k_x());
  if (static_cast<int>(partition.size()) != expected)
    throw PartitionError("partition must select k_z - k_x columns");
  std::vector<bool> seen(static_cast<std::size_t>(kz), false);
  for (int c : partition) {
    if (c < 0 || c >= kz) throw PartitionError("partition index out of range");
    if (seen[static_cast<std::size_t>(c)]) throw PartitionError("duplicate partition index");
    seen[static_cast<std::size_t>(c)] = true;
  }
}

}  // namespace

TestResult j_test(const IVDataset& dataset, const EstimationResult& first_step,
                  const EstimationResult& second_step, const CovarianceSpec& spec) {
  validate(dataset);
  MatrixXd S = meat(dataset.Z, first_step.residuals, spec);
  VectorXd g = dataset.Z.transpose() * second_step.residuals;
  const double stat = quad_form_inv(S, g);
  return make_result(stat, static_cast<int>(dataset.k_z() - dataset.k_x()), TestKind::HansenJ);
}

TestResult hansen_j(const IVDataset& dataset, const CovarianceSpec& spec) {
  EstimationResult first = estimate_2sls(dataset);
  MatrixXd S = meat(dataset.Z, first.residuals, spec);
  EstimationResult second = estimate_gmm2(dataset, first, S);
  return j_test(dataset, first, second, spec);
}

TestResult robust_score(const IVDataset& dataset, const EstimationResult& estimate,
                        const CovarianceSpec& spec, const std::vector<int>& partition) {
  validate(dataset);
  check_partition(dataset, partition);
  const int kz = static_cast<int>(dataset.k_z());

  std::vector<int> z1_cols = complement_indices(kz, partition);
  MatrixXd pi1 = select_rows(estimate.pi_hat, z1_cols);
  if (!has_full_column_rank(pi1))
    throw PartitionError("just-identifying block of pi_hat is singular for this partition");

  MatrixXd Z2 = select_columns(dataset.Z, partition);
  MatrixXd Xhat = dataset.Z * estimate.pi_hat;

  // Residualize Z2 on Xhat via thin QR (M_Xhat Z2).
  Eigen::HouseholderQR<MatrixXd> qr(Xhat);
  MatrixXd Q = qr.householderQ() * MatrixXd::Identity(Xhat.rows(), Xhat.cols());
  MatrixXd Z2t = Z2 - Q * (Q.transpose() * Z2);

  VectorXd s = Z2t.transpose() * estimate.residuals;
  MatrixXd V = meat(Z2t, estimate.residuals, spec);
  const double stat = quad_form_inv(V, s);
  TestKind kind = (estimate.method == Method::LIML) ? TestKind::RobustScoreLIML
                                                    : TestKind::RobustScore2SLS;
  return make_result(stat, kz - static_cast<int>(dataset.k_x()), kind, partition);
}

TestResult robust_score(const IVDataset& dataset, const EstimationResult& estimate,
                        const CovarianceSpec& spec) {
  validate(dataset);
  const int kz = static_cast<int>(dataset.k_z());
  const int kx = static_cast<int>(dataset.k_x());
  // Default Z2 = last kz - kx columns. If the implied just-identifying block
  // of pi_hat is singular, rotate the window until one works; partition
  // invariance makes the choice immaterial.
  for (int shift = 0; shift < kz; ++shift) {
    std::vector<int> z2;
    for (int j = 0; j < kz - kx; ++j) z2.push_back((kx + j + shift) % kz);
    std::sort(z2.begin(), z2.end());
    try {
      return robust_score(dataset, estimate, spec, z2);
    } catch (const PartitionError&) {
      continue;
    }
  }
  throw PartitionError("no rotation yields an invertible just-identifying block");
}

TestResult kp_test(const IVDataset& dataset, const CovarianceSpec& spec) {
  EstimationResult liml = estimate_liml(dataset);
  TestResult r = robust_score(dataset, liml, spec);
  r.test = TestKind::KP;
  return r;
}

TestResult sargan_test(const IVDataset& dataset, const EstimationResult& estimate) {
  validate(dataset);
  const VectorXd& u = estimate.residuals;
  MatrixXd ZtZ = dataset.Z.transpose() * dataset.Z;
  VectorXd Ztu = dataset.Z.transpose() * u;
  const double upzu = Ztu.dot(chol_solve(ZtZ, Ztu));
  const double sigma2 = u.squaredNorm() / static_cast<double>(dataset.n_obs());
  if (sigma2 <= 0.0) throw SingularityError("zero residual variance in Sargan test");
  return make_result(upzu / sigma2, static_cast<int>(dataset.k_z() - dataset.k_x()),
                     TestKind::Sargan);
}

EffectiveFResult effective_f(const IVDataset& dataset, const CovarianceSpec& spec, double tau,
                             double level) {
  validate(dataset);
  if (dataset.k_x() != 1)
    throw UnsupportedError("effective F is defined for a single endogenous regressor");
  if (tau <= 0.0 || tau >= 1.0) throw DomainError("tau must lie in (0,1)");

  const VectorXd x = dataset.X.col(0);
  MatrixXd ZtZ = dataset.Z.transpose() * dataset.Z;
  VectorXd Ztx = dataset.Z.transpose() * x;
  Eigen::LLT<MatrixXd> llt(ZtZ);
  if (llt.info() != Eigen::Success) throw SingularityError("Z'Z is not positive definite");
  VectorXd pi = llt.solve(Ztx);
  VectorXd vhat = x - dataset.Z * pi;
  const double xpzx = Ztx.dot(pi);

  MatrixXd S = meat(dataset.Z, vhat, spec);
  // W2 = avar estimate of sqrt(n) pi_hat after orthonormalizing Z; its trace
  // and eigenvalues are computed in the invariant form S (Z'Z)^{-1}.
  MatrixXd W2 = llt.solve(S);  // (Z'Z)^{-1} S, similar to the symmetric form
  const double tr = W2.trace();
  if (tr <= 0.0) throw SingularityError("robust first-stage covariance has nonpositive trace");
  const double f_eff = xpzx / tr;

  // Symmetric eigenvalues of W2 via T' S T with T T' = (Z'Z)^{-1}.
  MatrixXd T = sym_inverse_sqrt(ZtZ);
  MatrixXd W2sym = T * S * T;
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(W2sym);
  if (es.info() != Eigen::Success) throw ConvergenceError("eigendecomposition failed in effective_f");
  const double lmax = es.eigenvalues()(es.eigenvalues().size() - 1);
  const double tr2 = es.eigenvalues().array().square().sum();

  const double xbar = 1.0 / tau;
  const double k_eff = tr * tr * (1.0 + 2.0 * xbar) / (tr2 + 2.0 * xbar * tr * lmax);
  const double kappa = noncentral_chi2_quantile(1.0 - level, k_eff, k_eff * xbar) / k_eff;

  EffectiveFResult out;
  out.result.statistic = clamp_stat(f_eff);
  out.result.df = static_cast<int>(dataset.k_z());
  out.result.p_value = 1.0;  // not a chi-square test; compare against kappa
  out.result.test = TestKind::EffectiveF;
  out.kappa = kappa;
  out.k_eff = k_eff;
  return out;
}

ConcentrationResult concentration(const MatrixXd& Pi, const MatrixXd& ZtZ,
                                  const MatrixXd& omega_zv, const MatrixXd& qzz_inv) {
  const auto kz = Pi.rows();
  const auto kx = Pi.cols();
  if (ZtZ.rows() != kz || ZtZ.cols() != kz) throw DimensionError("Z'Z must be k_z x k_z");
  if (qzz_inv.rows() != kz || qzz_inv.cols() != kz)
    throw DimensionError("qzz_inv must be k_z x k_z");
  if (omega_zv.rows() != kx * kz || omega_zv.cols() != kx * kz)
    throw DimensionError("omega_zv must be (k_x k_z) x (k_x k_z)");
  if (!omega_zv.isApprox(omega_zv.transpose(), 1e-8))
    throw DimensionError("omega_zv must be symmetric");

  // (j,l) entry of R'(Omega kron Qzz^{-1})R with R = I kron vec(I) reduces to
  // tr(Qzz^{-1} Omega_{jl}) over the k_z x k_z blocks of Omega_ZV.
  MatrixXd v_zv(kx, kx);
  for (Eigen::Index j = 0; j < kx; ++j)
    for (Eigen::Index l = 0; l < kx; ++l)
      v_zv(j, l) = (qzz_inv * omega_zv.block(j * kz, l * kz, kz, kz)).trace();
  v_zv = 0.5 * (v_zv + v_zv.transpose()).eval();

  MatrixXd v_half_inv = sym_inverse_sqrt(v_zv);
  MatrixXd mu2 = static_cast<double>(kz) * v_half_inv * Pi.transpose() * ZtZ * Pi * v_half_inv;

  ConcentrationResult out;
  out.mu2 = 0.5 * (mu2 + mu2.transpose());
  out.v_zv = v_zv;
  return out;
}

}  // namespace weakiv
