#pragma once

#include <atomic>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "weakiv/rng.hpp"
#include "weakiv/simulation.hpp"

namespace weakiv {

// Population primitives of the weak-instrument limit experiment. Under
// Pi = C/sqrt(n), the sample moments (Z'u/sqrt(n), vec(Z'V)/sqrt(n))
// converge to a normal vector with covariance omega_z, and every estimator
// and overidentification statistic converges to a functional of that vector
// plus the fixed moments stored here.
struct LimitModel {
  Eigen::MatrixXd C;        // k_z x k_x local-to-zero first-stage slope
  Eigen::VectorXd beta;     // true structural coefficients
  Eigen::MatrixXd qzz;      // E[z z']
  Eigen::MatrixXd omega_z;  // covariance of (Psi_Zu', vec(Psi_ZV)')', (k_x+1)k_z square

  Eigen::MatrixXd sigma_v;     // E[v v'], k_x x k_x
  Eigen::VectorXd sigma_vu;    // E[v u], k_x
  double sigma_u2 = 0.0;       // E[u^2]
  Eigen::MatrixXd sigma_vbar;  // reduced-form second moments E[vbar vbar'], (k_x+1) square

  // Fourth-moment matrices entering the robust-variance limit:
  // fourth_u = E[u^2 z z'], fourth_uv[j] = E[u v_j z z'],
  // fourth_vv[j][l] = E[v_j v_l z z'].
  Eigen::MatrixXd fourth_u;
  std::vector<Eigen::MatrixXd> fourth_uv;
  std::vector<std::vector<Eigen::MatrixXd>> fourth_vv;

  Eigen::MatrixXd q2;   // E[z z_2'], k_z x (k_z - k_x), default partition Z2 = last columns
  Eigen::MatrixXd q22;  // E[z_2 z_2']

  int k_z() const { return static_cast<int>(C.rows()); }
  int k_x() const { return static_cast<int>(C.cols()); }
};

void validate(const LimitModel& model);

// One realization of the limiting random objects.
struct LimitDraw {
  Eigen::VectorXd psi_zu;
  Eigen::MatrixXd psi_zv;
  double alpha_l = 0.0;
  Eigen::VectorXd beta_2sls;
  Eigen::VectorXd beta_liml;
  Eigen::MatrixXd pi_2sls;
  Eigen::MatrixXd pi_liml;
  double j_limit = 0.0;
  double kp_limit = 0.0;
};

// Prepared sampler (factorizes omega_z once, with PSD repair clipping
// eigenvalues below 1e-12 x trace to zero).
class LimitSampler {
 public:
  explicit LimitSampler(LimitModel model);

  // Draws until a non-degenerate realization appears; draws where a required
  // inverse fails are rejected and counted. Throws SingularityError when the
  // running rejection rate exceeds 1% (after a burn-in of attempts), since
  // silent resampling beyond that would bias the sampled law.
  LimitDraw sample(RngStream& rng) const;

  long degenerate_count() const { return degenerate_; }
  long attempt_count() const { return attempts_; }
  const LimitModel& model() const { return model_; }

 private:
  LimitDraw try_sample(RngStream& rng, bool& ok) const;

  LimitModel model_;
  Eigen::MatrixXd omega_factor_;  // omega_z = F F'
  Eigen::MatrixXd qzz_inv_;
  mutable std::atomic<long> degenerate_{0};
  mutable std::atomic<long> attempts_{0};
};

LimitDraw sample_limit_draw(const LimitModel& model, RngStream& rng);

struct LimitRates {
  double j_rate = 0.0;
  double kp_rate = 0.0;
  long draws = 0;
  long degenerate = 0;
};

// Fraction of draws whose limit statistics exceed the chi-square(k_z - k_x)
// upper-level quantile. Deterministic given (model, n_draws, level, seed);
// draw i uses the counter-based stream (seed, i).
LimitRates limit_rejection_rate(const LimitModel& model, long n_draws, double level,
                                std::uint64_t seed = 0, int threads = 0);

// Population limit model implied by a Monte Carlo design configuration; all
// moments are in closed form (standard normal instruments admit exact
// Gaussian moment algebra). The Power design maps to its null (omega = 0),
// where the limit experiment is defined.
LimitModel model_from_design(const SimulationConfig& config);

// Monte Carlo estimate of the design's population moment matrices, with the
// largest elementwise standard error across the estimated blocks. Serves as
// an independent check of the closed forms in model_from_design.
struct NumericMoments {
  Eigen::MatrixXd omega_zu;
  Eigen::MatrixXd omega_zvu;
  Eigen::MatrixXd omega_zv;
  double max_standard_error = 0.0;
};
NumericMoments design_moments_numeric(const Design& design, int k_z, double rho, long n_draws,
                                      std::uint64_t seed);

}  // namespace weakiv
