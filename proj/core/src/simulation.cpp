#include "weakiv/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <mutex>
#include <string>
#include <thread>

#include "weakiv/covariance.hpp"
#include "weakiv/distributions.hpp"
#include "weakiv/errors.hpp"
#include "weakiv/estimators.hpp"
#include "weakiv/inference.hpp"
#include "weakiv/linalg.hpp"
#include "weakiv/rng.hpp"

namespace weakiv {

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("WEAKIV_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

void parallel_for(long count, int threads, const std::function<void(long)>& body) {
  threads = std::min<long>(resolve_threads(threads), std::max(count, 1L));
  if (threads <= 1) {
    for (long i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<long> next{0};
  constexpr long kChunk = 64;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  std::exception_ptr first_error;
  std::mutex error_mutex;
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&]() {
      for (;;) {
        const long begin = next.fetch_add(kChunk);
        if (begin >= count) return;
        const long end = std::min(begin + kChunk, count);
        for (long i = begin; i < end; ++i) {
          try {
            body(i);
          } catch (...) {
            std::lock_guard<std::mutex> lock(error_mutex);
            if (!first_error) first_error = std::current_exception();
            return;
          }
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

double calibrate_pi(const Design& design, int k_z, double /*rho*/, double mu2_target, int n) {
  if (mu2_target < 0.0) throw ConfigError("mu2_target must be nonnegative");
  if (k_z < 2 || n <= 0) throw ConfigError("need k_z >= 2 and n >= 1");
  const double sigma_v = design_sigma_v(design, k_z);
  return std::sqrt(mu2_target * sigma_v / (static_cast<double>(k_z) * static_cast<double>(n)));
}

IVDataset generate_dataset(const SimulationConfig& config, long replication_index) {
  const int n = config.n;
  const int kz = config.k_z;
  if (kz < 2) throw ConfigError("k_z must be at least 2");
  if (std::abs(config.rho) >= 1.0) throw ConfigError("rho must lie in (-1, 1)");
  if (n <= kz + 1) throw ConfigError("n too small for k_z instruments plus a constant");

  RngStream rng(config.seed, static_cast<std::uint64_t>(replication_index));
  const double pi = calibrate_pi(config.design, kz, config.rho, config.mu2_target, n);

  Eigen::MatrixXd Z(n, kz);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < kz; ++j) Z(i, j) = rng.normal();

  const double rho = config.rho;
  const double rho_c = std::sqrt(1.0 - rho * rho);
  Eigen::VectorXd u(n), v(n);
  for (int i = 0; i < n; ++i) {
    const double e1 = rng.normal();
    const double e2 = rng.normal();
    const double us = e1;
    const double vs = rho * e1 + rho_c * e2;
    double g = 1.0;
    switch (config.design.kind) {
      case Design::Kind::Design1:
      case Design::Kind::Power:
        // |z_1|^a (absolute value keeps the scale real for fractional a).
        g = std::pow(std::abs(Z(i, 0)), config.design.alpha);
        break;
      case Design::Kind::Design2:
        g = std::sqrt(std::exp(config.design.alpha * Z.row(i).sum()));
        break;
    }
    u(i) = g * us;
    v(i) = g * vs;
    if (config.design.kind == Design::Kind::Power) u(i) += Z(i, 0) * config.design.omega;
  }

  IVDataset d;
  d.Z = Z;
  d.X = Z.rowwise().sum() * pi + v;
  d.y = u;  // beta0 = beta1 = 0
  d.X_exog = Eigen::MatrixXd::Ones(n, 1);
  return d;
}

namespace {

struct RepOutcome {
  bool degenerate = false;
  double beta_2sls = 0.0;
  double beta_liml = 0.0;
  double j_stat = 0.0;
  double kp_stat = 0.0;
};

RepOutcome run_replication(const SimulationConfig& config, long rep) {
  RepOutcome out;
  try {
    IVDataset raw = generate_dataset(config, rep);
    IVDataset d = partial_out(raw);
    EstimationResult two_sls = estimate_2sls(d);
    EstimationResult liml = estimate_liml(d);
    const CovarianceSpec hc0 = CovarianceSpec::hc0();
    Eigen::MatrixXd S = meat(d.Z, two_sls.residuals, hc0);
    EstimationResult second = estimate_gmm2(d, two_sls, S);
    TestResult j = j_test(d, two_sls, second, hc0);
    TestResult kp = robust_score(d, liml, hc0);
    out.beta_2sls = two_sls.beta_hat(0);
    out.beta_liml = liml.beta_hat(0);
    out.j_stat = j.statistic;
    out.kp_stat = kp.statistic;
  } catch (const Error&) {
    out.degenerate = true;
  }
  return out;
}

}  // namespace

SimulationSummary run_design(const SimulationConfig& config) {
  if (config.replications <= 0) throw ConfigError("replications must be positive");
  if (config.k_z < 2) throw ConfigError("k_z must be at least 2");
  if (config.levels.empty()) throw ConfigError("at least one level required");
  for (double level : config.levels)
    if (level <= 0.0 || level > 1.0) throw ConfigError("levels must lie in (0, 1]");

  const long R = config.replications;
  std::vector<RepOutcome> outcomes(static_cast<std::size_t>(R));
  parallel_for(R, config.threads,
               [&](long rep) { outcomes[static_cast<std::size_t>(rep)] = run_replication(config, rep); });

  SimulationSummary s;
  s.pi_used = calibrate_pi(config.design, config.k_z, config.rho, config.mu2_target, config.n);

  std::vector<double> b2, bl, js, kps;
  b2.reserve(outcomes.size());
  bl.reserve(outcomes.size());
  js.reserve(outcomes.size());
  kps.reserve(outcomes.size());
  for (const RepOutcome& o : outcomes) {
    if (o.degenerate) {
      ++s.degenerate_count;
      continue;
    }
    b2.push_back(o.beta_2sls);
    bl.push_back(o.beta_liml);
    js.push_back(o.j_stat);
    kps.push_back(o.kp_stat);
  }
  s.replications_completed = static_cast<long>(b2.size());
  s.flagged = s.degenerate_count * 1000 > R;
  if (s.replications_completed == 0) throw ConfigError("all replications degenerate");

  const int df = config.k_z - 1;
  const double denom = static_cast<double>(s.replications_completed);
  for (double level : config.levels) {
    const double cv = chi2_quantile(1.0 - level, df);
    LevelRates lr;
    lr.level = level;
    lr.j_rate = static_cast<double>(std::count_if(js.begin(), js.end(),
                                                  [cv](double v) { return v > cv; })) /
                denom;
    lr.kp_rate = static_cast<double>(std::count_if(kps.begin(), kps.end(),
                                                   [cv](double v) { return v > cv; })) /
                 denom;
    s.rejection.push_back(lr);
  }

  // beta_1 = 0, so beta_hat itself is the estimation error.
  s.median_bias_2sls = median(b2);
  s.median_bias_liml = median(bl);
  s.range_90_10_2sls = quantile(b2, 0.90) - quantile(b2, 0.10);
  s.range_90_10_liml = quantile(bl, 0.90) - quantile(bl, 0.10);
  return s;
}

std::vector<PowerPoint> power_curve(const SimulationConfig& config,
                                    const std::vector<double>& omega_grid) {
  if (config.design.kind != Design::Kind::Power)
    throw ConfigError("power_curve requires a Power design");
  std::vector<PowerPoint> points;
  points.reserve(omega_grid.size());
  for (double omega : omega_grid) {
    SimulationConfig cell = config;
    cell.design.omega = omega;
    cell.levels = {0.05};
    SimulationSummary s = run_design(cell);
    points.push_back({omega, s.rejection.front().j_rate, s.rejection.front().kp_rate});
  }
  return points;
}

}  // namespace weakiv
