#include "weakiv/dataset.hpp"

#include <string>

#include "weakiv/errors.hpp"
#include "weakiv/linalg.hpp"

namespace weakiv {

void validate(const IVDataset& dataset) {
  const auto n = dataset.n_obs();
  const auto kx = dataset.k_x();
  const auto kz = dataset.k_z();

  if (dataset.X.rows() != n || dataset.Z.rows() != n)
    throw DimensionError("y, X and Z must have the same number of rows");
  if (dataset.X_exog && dataset.X_exog->rows() != n)
    throw DimensionError("X_exog must have the same number of rows as y");
  if (kx < 1) throw DimensionError("at least one endogenous regressor required");
  if (kz <= kx)
    throw DimensionError("overidentification required: k_z = " + std::to_string(kz) +
                         " must exceed k_x = " + std::to_string(kx));
  if (n <= kz) throw DimensionError("need n > k_z");

  if (!dataset.y.allFinite() || !dataset.X.allFinite() || !dataset.Z.allFinite() ||
      (dataset.X_exog && !dataset.X_exog->allFinite()))
    throw NonFiniteError("dataset contains non-finite entries");

  if (!has_full_column_rank(dataset.Z)) throw RankError("Z is rank deficient");
  if (!has_full_column_rank(dataset.X)) throw RankError("X is rank deficient");
}

IVDataset partial_out(const IVDataset& dataset) {
  if (!dataset.X_exog) throw RankError("partial_out requires X_exog");
  const Eigen::MatrixXd& E = *dataset.X_exog;
  const auto n = dataset.n_obs();
  if (E.rows() != n) throw DimensionError("X_exog row count mismatch");
  if (n <= dataset.k_z() + E.cols()) throw DimensionError("need n > k_z + k_e");
  if (!has_full_column_rank(E)) throw RankError("X_exog is rank deficient");

  // Thin-QR projector: residual = v - Q (Q'v).
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(E);
  Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(n, E.cols());
  auto residualize = [&Q](const Eigen::MatrixXd& A) -> Eigen::MatrixXd {
    return A - Q * (Q.transpose() * A);
  };

  IVDataset out;
  out.y = residualize(dataset.y);
  out.X = residualize(dataset.X);
  out.Z = residualize(dataset.Z);
  out.X_exog = std::nullopt;
  if (!has_full_column_rank(out.Z)) throw RankError("residualized Z lost column rank");
  validate(out);
  return out;
}

IVDataset orthonormalize(const IVDataset& dataset) {
  const double n = static_cast<double>(dataset.n_obs());
  Eigen::MatrixXd S = dataset.Z.transpose() * dataset.Z / n;
  Eigen::LLT<Eigen::MatrixXd> llt(S);
  if (llt.info() != Eigen::Success) throw RankError("Z'Z/n is not positive definite");
  // Z_new = Z U^{-1} with U = L' the upper factor (positive diagonal), via
  // U' Z_new' = Z'.
  Eigen::MatrixXd L = llt.matrixL();
  IVDataset out = dataset;
  out.Z = L.triangularView<Eigen::Lower>()
              .solve(dataset.Z.transpose())
              .transpose();
  return out;
}

}  // namespace weakiv
