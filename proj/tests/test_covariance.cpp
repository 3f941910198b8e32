#include <doctest.h>

#include <Eigen/Dense>

#include "testutil.hpp"
#include "weakiv/covariance.hpp"
#include "weakiv/errors.hpp"
#include "weakiv/rng.hpp"

using namespace weakiv;

namespace {

Eigen::MatrixXd random_Z(RngStream& rng, int n, int k) {
  Eigen::MatrixXd Z(n, k);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < k; ++j) Z(i, j) = rng.normal();
  return Z;
}

Eigen::VectorXd random_u(RngStream& rng, int n) {
  Eigen::VectorXd u(n);
  for (int i = 0; i < n; ++i) u(i) = rng.normal();
  return u;
}

}  // namespace

TEST_CASE("NeweyWest(0) equals HC0 exactly") {
  RngStream rng(21, 0);
  Eigen::MatrixXd Z = random_Z(rng, 50, 3);
  Eigen::VectorXd u = random_u(rng, 50);
  Eigen::MatrixXd a = meat(Z, u, CovarianceSpec::newey_west(0));
  Eigen::MatrixXd b = meat(Z, u, CovarianceSpec::hc0());
  CHECK(testutil::max_abs_diff(a, b) == 0.0);
}

TEST_CASE("zero residuals give a zero meat") {
  RngStream rng(22, 0);
  Eigen::MatrixXd Z = random_Z(rng, 30, 2);
  Eigen::VectorXd u = Eigen::VectorXd::Zero(30);
  for (auto spec : {CovarianceSpec::hc0(), CovarianceSpec::newey_west(3),
                    CovarianceSpec::homoskedastic()})
    CHECK(meat(Z, u, spec).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("Newey-West L=1 matches a direct summation oracle") {
  Eigen::MatrixXd Z(5, 2);
  Z << 1.0, 0.5, -0.3, 1.2, 0.7, -0.4, 1.5, 0.1, -0.8, 0.9;
  Eigen::VectorXd u(5);
  u << 0.2, -0.5, 0.3, 0.1, -0.4;
  // Bartlett weight 1 - 1/2 on Gamma_1 + Gamma_1'.
  Eigen::MatrixXd expected(2, 2);
  expected << 0.37250000000000005, -0.36675000000000002, -0.36675000000000002,
      0.52129999999999999;
  Eigen::MatrixXd got = meat(Z, u, CovarianceSpec::newey_west(1));
  CHECK(testutil::max_abs_diff(got, expected) < 1e-12);
}

TEST_CASE("meat output is symmetric and HC0 is positive semidefinite") {
  RngStream rng(23, 0);
  Eigen::MatrixXd Z = random_Z(rng, 80, 4);
  Eigen::VectorXd u = random_u(rng, 80);
  for (auto spec : {CovarianceSpec::hc0(), CovarianceSpec::hc1(1), CovarianceSpec::newey_west(5),
                    CovarianceSpec::homoskedastic()}) {
    Eigen::MatrixXd S = meat(Z, u, spec);
    CHECK(testutil::max_abs_diff(S, S.transpose()) < 1e-14);
  }
  Eigen::MatrixXd S = meat(Z, u, CovarianceSpec::hc0());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
  CHECK(es.eigenvalues()(0) >= -1e-10 * S.trace());
}

TEST_CASE("HC0 scaling in the residuals is exact") {
  RngStream rng(24, 0);
  Eigen::MatrixXd Z = random_Z(rng, 40, 3);
  Eigen::VectorXd u = random_u(rng, 40);
  Eigen::MatrixXd S1 = meat(Z, 2.5 * u, CovarianceSpec::hc0());
  Eigen::MatrixXd S2 = 6.25 * meat(Z, u, CovarianceSpec::hc0());
  CHECK(testutil::max_abs_diff(S1, S2) < 1e-12 * S2.norm());
}

TEST_CASE("HC1 applies the small-sample factor") {
  RngStream rng(25, 0);
  const int n = 40;
  Eigen::MatrixXd Z = random_Z(rng, n, 3);
  Eigen::VectorXd u = random_u(rng, n);
  Eigen::MatrixXd h0 = meat(Z, u, CovarianceSpec::hc0());
  Eigen::MatrixXd h1 = meat(Z, u, CovarianceSpec::hc1(2));
  CHECK(testutil::max_abs_diff(h1, h0 * (static_cast<double>(n) / (n - 2))) < 1e-12);
}

TEST_CASE("meat rejects mismatched dimensions") {
  RngStream rng(26, 0);
  Eigen::MatrixXd Z = random_Z(rng, 30, 2);
  Eigen::VectorXd u = random_u(rng, 29);
  CHECK_THROWS_AS(meat(Z, u, CovarianceSpec::hc0()), DimensionError);
  Eigen::VectorXd u2 = random_u(rng, 30);
  CHECK_THROWS_AS(meat(Z, u2, CovarianceSpec{CovarianceSpec::Kind::NeweyWest, -1, 1}),
                  DimensionError);
}
