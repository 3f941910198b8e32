#include <doctest.h>

#include <cmath>
#include <vector>

#include "testutil.hpp"
#include "weakiv/design.hpp"
#include "weakiv/errors.hpp"
#include "weakiv/rng.hpp"
#include "weakiv/simulation.hpp"

using namespace weakiv;

namespace {

SimulationConfig base_config() {
  SimulationConfig cfg;
  cfg.design = Design::design1(0.5);
  cfg.n = 120;
  cfg.k_z = 2;
  cfg.rho = 0.5;
  cfg.mu2_target = 8.0;
  cfg.replications = 400;
  cfg.seed = 3141;
  return cfg;
}

}  // namespace

TEST_CASE("calibrate_pi handles the zero and homoskedastic references") {
  CHECK(calibrate_pi(Design::design1(1.0), 2, 0.5, 0.0, 120) == 0.0);
  // Homoskedastic: Sigma_V = 1, pi = sqrt(mu2 / (k_z n)).
  CHECK(calibrate_pi(Design::design1(0.0), 2, 0.0, 8.0, 120) ==
        doctest::Approx(0.18257418583).epsilon(1e-9));
}

TEST_CASE("calibrated pi reproduces the target concentration empirically") {
  // Design 1 with alpha = 1: Sigma_V = E[z^2] = 1.
  const int kz = 2, n = 120;
  const double mu2 = 8.0;
  const double pi = calibrate_pi(Design::design1(1.0), kz, 0.5, mu2, n);
  const double sigma_v = design_sigma_v(Design::design1(1.0), kz);
  RngStream rng(57721, 0);
  double acc = 0.0;
  const int datasets = 20000;
  for (int d = 0; d < datasets; ++d) {
    // pi' Z'Z pi with pi_j = pi: pi^2 * sum_{j,l} (Z'Z)_{jl}.
    double s = 0.0;
    Eigen::MatrixXd Z(n, kz);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < kz; ++j) Z(i, j) = rng.normal();
    Eigen::VectorXd colsum = Z.rowwise().sum();
    s = colsum.squaredNorm();
    acc += pi * pi * s / sigma_v;
  }
  acc /= datasets;
  CHECK(std::abs(acc - mu2) < 0.02 * mu2);
}

TEST_CASE("homoskedastic design leaves squared errors uncorrelated with instruments") {
  SimulationConfig cfg = base_config();
  cfg.design = Design::design1(0.0);
  cfg.n = 1000000;
  IVDataset d = generate_dataset(cfg, 0);
  Eigen::VectorXd u = d.y;  // beta = 0
  Eigen::ArrayXd u2 = u.array().square();
  Eigen::ArrayXd z2 = d.Z.col(0).array().square();
  const double cu = (u2 - u2.mean()).matrix().dot((z2 - z2.mean()).matrix());
  const double corr = cu / std::sqrt((u2 - u2.mean()).matrix().squaredNorm() *
                                     (z2 - z2.mean()).matrix().squaredNorm());
  CHECK(std::abs(corr) < 3e-3);  // 3 sigma at n = 1e6
}

TEST_CASE("Design 1 with alpha = 1 has conditional variance z1^2") {
  SimulationConfig cfg = base_config();
  cfg.design = Design::design1(1.0);
  cfg.n = 1000000;
  cfg.mu2_target = 0.0;
  IVDataset d = generate_dataset(cfg, 1);
  Eigen::ArrayXd u2 = d.y.array().square();
  Eigen::ArrayXd z2 = d.Z.col(0).array().square();
  // Regression of u^2 on z1^2 passes through slope 1.
  const double zbar = z2.mean();
  const double ubar = u2.mean();
  const double slope = ((z2 - zbar) * (u2 - ubar)).sum() / (z2 - zbar).square().sum();
  CHECK(std::abs(slope - 1.0) < 0.05);
}

TEST_CASE("Power design at omega = 0 matches Design 1 squared-error law") {
  SimulationConfig cfg = base_config();
  cfg.n = 100000;
  cfg.design = Design::design1(0.7);
  IVDataset d1 = generate_dataset(cfg, 0);
  cfg.design = Design::power(0.7, 0.0);
  cfg.seed = 999;  // independent draw, same law
  IVDataset d2 = generate_dataset(cfg, 0);
  std::vector<double> a(d1.y.data(), d1.y.data() + d1.y.size());
  std::vector<double> b(d2.y.data(), d2.y.data() + d2.y.size());
  for (double& v : a) v *= v;
  for (double& v : b) v *= v;
  CHECK(testutil::ks_distance(a, b) < 0.01);
}

TEST_CASE("run_design is deterministic under seed and thread count") {
  SimulationConfig cfg = base_config();
  cfg.threads = 1;
  SimulationSummary a = run_design(cfg);
  cfg.threads = 4;
  SimulationSummary b = run_design(cfg);
  CHECK(a.median_bias_2sls == b.median_bias_2sls);
  CHECK(a.median_bias_liml == b.median_bias_liml);
  CHECK(a.range_90_10_2sls == b.range_90_10_2sls);
  REQUIRE(a.rejection.size() == b.rejection.size());
  for (std::size_t i = 0; i < a.rejection.size(); ++i) {
    CHECK(a.rejection[i].j_rate == b.rejection[i].j_rate);
    CHECK(a.rejection[i].kp_rate == b.rejection[i].kp_rate);
  }
  CHECK(a.replications_completed + a.degenerate_count == cfg.replications);
}

TEST_CASE("run_design validates its configuration") {
  SimulationConfig cfg = base_config();
  cfg.replications = 0;
  CHECK_THROWS_AS(run_design(cfg), ConfigError);
  cfg = base_config();
  cfg.k_z = 1;
  CHECK_THROWS_AS(run_design(cfg), ConfigError);
  cfg = base_config();
  cfg.levels = {1.5};
  CHECK_THROWS_AS(run_design(cfg), ConfigError);
}

TEST_CASE("power curve starts at the null size and rises to high power") {
  SimulationConfig cfg;
  cfg.design = Design::power(0.5, 0.0);
  cfg.n = 120;
  cfg.k_z = 2;
  cfg.rho = 0.5;
  cfg.mu2_target = 48.0;
  cfg.replications = 3000;
  cfg.seed = 2718;

  std::vector<PowerPoint> curve = power_curve(cfg, {0.0, 1.2});
  // omega = 0 reproduces the null size for this design.
  SimulationConfig null_cfg = cfg;
  null_cfg.levels = {0.05};
  SimulationSummary null_run = run_design(null_cfg);
  CHECK(curve[0].j_rate == null_run.rejection[0].j_rate);
  CHECK(curve[0].kp_rate == null_run.rejection[0].kp_rate);
  CHECK(curve[1].j_rate >= 0.9);
  CHECK(curve[1].kp_rate >= 0.9);
}

TEST_CASE("power is monotone in omega up to Monte Carlo noise at low endogeneity") {
  SimulationConfig cfg;
  cfg.design = Design::power(0.5, 0.0);
  cfg.n = 120;
  cfg.k_z = 2;
  cfg.rho = 0.2;
  cfg.mu2_target = 48.0;
  cfg.replications = 3000;
  cfg.seed = 1618;
  std::vector<PowerPoint> curve = power_curve(cfg, {0.0, 0.4, 0.8});
  CHECK(curve[1].kp_rate >= curve[0].kp_rate - 0.02);
  CHECK(curve[2].kp_rate >= curve[1].kp_rate - 0.02);
  CHECK(curve[1].j_rate >= curve[0].j_rate - 0.02);
  CHECK(curve[2].j_rate >= curve[1].j_rate - 0.02);
}

TEST_CASE("dataset generation is pinned to (seed, replication) streams") {
  SimulationConfig cfg = base_config();
  IVDataset a = generate_dataset(cfg, 7);
  IVDataset b = generate_dataset(cfg, 7);
  IVDataset c = generate_dataset(cfg, 8);
  CHECK(testutil::max_abs_diff(a.Z, b.Z) == 0.0);
  CHECK(testutil::max_abs_diff(a.y, b.y) == 0.0);
  CHECK(testutil::max_abs_diff(a.Z, c.Z) > 0.0);
}
