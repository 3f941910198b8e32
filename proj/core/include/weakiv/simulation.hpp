#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "weakiv/dataset.hpp"
#include "weakiv/design.hpp"

namespace weakiv {

struct SimulationConfig {
  Design design;
  int n = 120;
  int k_z = 2;
  double rho = 0.0;
  double mu2_target = 0.0;
  long replications = 0;
  std::uint64_t seed = 0;
  std::vector<double> levels = {0.10, 0.05, 0.01};
  int threads = 0;  // 0 = WEAKIV_THREADS env or hardware concurrency
};

struct LevelRates {
  double level = 0.0;
  double j_rate = 0.0;
  double kp_rate = 0.0;
};

struct SimulationSummary {
  std::vector<LevelRates> rejection;  // one entry per requested level
  double median_bias_2sls = 0.0;
  double median_bias_liml = 0.0;
  double range_90_10_2sls = 0.0;  // 90th minus 10th percentile of beta_hat - beta
  double range_90_10_liml = 0.0;
  double pi_used = 0.0;
  long replications_completed = 0;
  long degenerate_count = 0;
  bool flagged = false;  // degenerate_count exceeded 0.1% of replications
};

// First-stage coefficient pi (common to all instruments) such that the
// population concentration parameter Sigma_V^{-1} Pi' E[Z'Z] Pi equals
// mu2_target: pi = sqrt(mu2_target Sigma_V / (k_z n)) with Sigma_V = E[v^2]
// under the design.
double calibrate_pi(const Design& design, int k_z, double rho, double mu2_target, int n);

// Dataset for one replication, drawn from the counter-based stream keyed by
// (config.seed, replication_index). X_exog is set to a constant column.
IVDataset generate_dataset(const SimulationConfig& config, long replication_index);

// Runs the full experiment: per replication computes 2SLS, LIML, Hansen J
// (2SLS first step, HC0 meat) and KP (HC0 meat), then aggregates rejection
// frequencies against chi-square(k_z - k_x) critical values, median bias and
// the 90:10 range for both estimators. Replications where a factorization
// fails are counted in degenerate_count and excluded from the aggregates.
// Results depend only on (config, seed), never on thread count.
SimulationSummary run_design(const SimulationConfig& config);

struct PowerPoint {
  double omega = 0.0;
  double j_rate = 0.0;
  double kp_rate = 0.0;
};

// Rejection rates at the 5% level across a grid of invalidity shifts omega,
// for a Power design configuration.
std::vector<PowerPoint> power_curve(const SimulationConfig& config,
                                    const std::vector<double>& omega_grid);

// Static-chunk deterministic parallel loop used by the simulation and limit
// sampling engines. Runs body(i) for i in [0, count); the body must only
// write to per-index slots.
void parallel_for(long count, int threads, const std::function<void(long)>& body);

// Thread-count resolution: explicit request, else WEAKIV_THREADS, else
// hardware concurrency.
int resolve_threads(int requested);

}  // namespace weakiv
