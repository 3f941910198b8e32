#pragma once

#include <Eigen/Dense>

#include "weakiv/dataset.hpp"

// Deterministic n = 20, k_z = 2, k_x = 1 dataset. The expected values below
// were computed by an independent oracle using explicit 2x2/1x1 normal-
// equation algebra and the quadratic characteristic polynomial for the LIML
// eigenvalue (quadratic_smallest_root reproduces that oracle in-test).
namespace fixtures {

// clang-format off
inline const double kY[] = {1.9482257747032103, -0.48615332113538007, 0.48502614458261206, 1.5835694674947391, -1.0579279949818423, 0.91016764459237176, 3.0180444693658037, 0.52694321419633239, -0.31080388693815031, -0.20853302049507194, 0.65001567346167777, 1.0579836406329548, -0.037471765330348988, 0.84847676082076917, -0.67864614993764083, -0.40421502593765646, 0.76924702340073248, -0.26722632540977098, 0.46957566368265824, 0.37143280947421597};
inline const double kX[] = {1.3491770920252963, 0.19278227834414313, 0.58108460895247316, 1.3630957934131027, -1.3595976582600331, 0.16783621399073478, 2.6887823793918106, 0.11497318328773443, -0.83671205587716435, -1.4378059756522292, 0.79402326633664622, 0.44802261694773593, -0.27246496457242875, 0.90006241208613036, -0.31589880358416933, -0.44878965850196079, 0.28627742168724679, -0.23434027874767255, 0.47569387813723929, 0.30174357675962171};
inline const double kZ1[] = {0.48398252773810624, -0.05369281733950327, 0.46678642895724021, 0.20227489929360437, -0.68864513231818869, -1.477784528155524, 1.1925697510315649, -0.14891127015630198, -1.6157736780384722, -1.2093271792576479, 0.1494680262444813, 0.57922960032345183, -0.30212320796918785, 1.8620992868242092, -0.11192250716114388, -1.2342976039793241, 0.23220205645452607, -1.1269270246226706, 0.23434048385780742, 1.3155716251983924};
inline const double kZ2[] = {0.12652561231939405, 1.1904946687197007, -0.37533841870089862, 0.90986133282837867, -0.40485704801416472, 1.627021508356385, 0.83200580975837468, -0.25151869659533427, -0.3912236762466772, 0.44573945729773429, 0.89127794273764371, -1.1746910546752021, -0.10247477585085472, -1.2280930954653904, -0.48090458587778706, 1.3043727980885194, 0.34194238400077515, 0.88918899500774462, -0.64001781486765275, -0.52688086184446425};
// clang-format on

inline constexpr int kN = 20;

// Oracle values (normal equations / characteristic polynomial / direct sums).
inline constexpr double kBeta2sls = 0.83802431883515205;
inline constexpr double kAlphaLiml = 0.015702893742887174;
inline constexpr double kBetaLiml = 0.83467180911598815;
inline constexpr double kBetaGmm2Hc0 = 0.83007844216495696;
inline constexpr double kJHc0 = 0.28486453006433099;
inline constexpr double kSargan = 0.3146412122025975;
inline constexpr double kKpHc0 = 0.28197013289842954;
inline constexpr double kFeffHc0 = 16.279556276092137;
inline constexpr double kPi2sls[2] = {0.95635190665941594, 0.66819348530184808};
inline constexpr double kPiLiml[2] = {0.96173723340587158, 0.62921785170623157};
inline constexpr double kMeatHc0[3] = {4.3876425083608401, -1.5449411005300659,
                                       3.7127438210635866};  // upper triangle

inline weakiv::IVDataset dataset() {
  weakiv::IVDataset d;
  d.y = Eigen::Map<const Eigen::VectorXd>(kY, kN);
  d.X = Eigen::Map<const Eigen::VectorXd>(kX, kN);
  d.Z.resize(kN, 2);
  d.Z.col(0) = Eigen::Map<const Eigen::VectorXd>(kZ1, kN);
  d.Z.col(1) = Eigen::Map<const Eigen::VectorXd>(kZ2, kN);
  return d;
}

// Smaller root of det(A - t B) = 0 for 2x2 symmetric A, B; independent check
// of the generalized eigensolver used by the LIML implementation.
inline double quadratic_smallest_root(const Eigen::Matrix2d& A, const Eigen::Matrix2d& B) {
  const double qa = B(0, 0) * B(1, 1) - B(0, 1) * B(1, 0);
  const double qb = -(A(0, 0) * B(1, 1) + A(1, 1) * B(0, 0) - A(0, 1) * B(1, 0) - A(1, 0) * B(0, 1));
  const double qc = A(0, 0) * A(1, 1) - A(0, 1) * A(1, 0);
  const double disc = std::sqrt(qb * qb - 4.0 * qa * qc);
  return std::min((-qb - disc) / (2.0 * qa), (-qb + disc) / (2.0 * qa));
}

}  // namespace fixtures
