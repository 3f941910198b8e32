#include "weakiv/asymptotics.hpp"

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

void validate(const LimitModel& model) {
  const int kz = model.k_z();
  const int kx = model.k_x();
  if (kx < 1 || kz <= kx) throw DimensionError("limit model requires k_z > k_x >= 1");
  if (model.beta.size() != kx) throw DimensionError("beta must have length k_x");
  if (model.qzz.rows() != kz || model.qzz.cols() != kz)
    throw DimensionError("qzz must be k_z x k_z");
  const Eigen::Index dim = static_cast<Eigen::Index>(kx + 1) * kz;
  if (model.omega_z.rows() != dim || model.omega_z.cols() != dim)
    throw DimensionError("omega_z must be (k_x+1)k_z square");
  if (!model.omega_z.isApprox(model.omega_z.transpose(), 1e-8))
    throw DimensionError("omega_z must be symmetric");
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(model.omega_z);
  if (es.eigenvalues()(0) < -1e-8 * std::max(1.0, es.eigenvalues().maxCoeff()))
    throw DimensionError("omega_z must be positive semidefinite");
  if (model.sigma_v.rows() != kx || model.sigma_v.cols() != kx)
    throw DimensionError("sigma_v must be k_x x k_x");
  if (model.sigma_vu.size() != kx) throw DimensionError("sigma_vu must have length k_x");
  if (model.sigma_vbar.rows() != kx + 1 || model.sigma_vbar.cols() != kx + 1)
    throw DimensionError("sigma_vbar must be (k_x+1) square");
  if (model.fourth_u.rows() != kz || model.fourth_u.cols() != kz)
    throw DimensionError("fourth_u must be k_z x k_z");
  if (static_cast<int>(model.fourth_uv.size()) != kx)
    throw DimensionError("fourth_uv must have k_x entries");
  if (static_cast<int>(model.fourth_vv.size()) != kx)
    throw DimensionError("fourth_vv must be k_x x k_x blocks");
  for (const auto& row : model.fourth_vv)
    if (static_cast<int>(row.size()) != kx) throw DimensionError("fourth_vv must be k_x x k_x blocks");
  if (model.q2.rows() != kz || model.q2.cols() != kz - kx)
    throw DimensionError("q2 must be k_z x (k_z - k_x)");
  if (model.q22.rows() != kz - kx || model.q22.cols() != kz - kx)
    throw DimensionError("q22 must be (k_z - k_x) square");
  // C = 0 is admitted as the completely unidentified boundary; a nonzero C
  // must have full column rank.
  if (model.C.cwiseAbs().maxCoeff() > 0.0 && !has_full_column_rank(model.C))
    throw RankError("nonzero C must have full column rank k_x");
}

namespace {

MatrixXd psd_factor(const MatrixXd& S) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(S);
  if (es.info() != Eigen::Success) throw ConvergenceError("omega_z eigendecomposition failed");
  VectorXd ev = es.eigenvalues();
  const double clip = 1e-12 * std::max(S.trace(), 0.0);
  for (Eigen::Index i = 0; i < ev.size(); ++i) ev(i) = ev(i) > clip ? std::sqrt(ev(i)) : 0.0;
  return es.eigenvectors() * ev.asDiagonal();
}

}  // namespace

LimitSampler::LimitSampler(LimitModel model) : model_(std::move(model)) {
  validate(model_);
  omega_factor_ = psd_factor(model_.omega_z);
  Eigen::LLT<MatrixXd> llt(model_.qzz);
  if (llt.info() != Eigen::Success) throw SingularityError("qzz is not positive definite");
  qzz_inv_ = llt.solve(MatrixXd::Identity(model_.k_z(), model_.k_z()));
}

LimitDraw LimitSampler::try_sample(RngStream& rng, bool& ok) const {
  const int kz = model_.k_z();
  const int kx = model_.k_x();
  const int k2 = kz - kx;
  ok = false;

  VectorXd g(omega_factor_.cols());
  for (Eigen::Index i = 0; i < g.size(); ++i) g(i) = rng.normal();
  VectorXd joint = omega_factor_ * g;

  LimitDraw d;
  d.psi_zu = joint.head(kz);
  d.psi_zv = Eigen::Map<const MatrixXd>(joint.data() + kz, kz, kx);

  // D = Qzz C + Psi_ZV drives every first-stage limit object.
  MatrixXd D = model_.qzz * model_.C + d.psi_zv;
  MatrixXd QiD = qzz_inv_ * D;
  MatrixXd Gx = D.transpose() * QiD;          // D' Qzz^{-1} D
  VectorXd bx = QiD.transpose() * d.psi_zu;   // D' Qzz^{-1} Psi_Zu
  if (sv_ratio(Gx) <= kRankTolerance) return d;
  d.beta_2sls = Gx.ldlt().solve(bx);

  // alpha_l: smallest generalized eigenvalue of (K' Qzz^{-1} K, sigma_vbar)
  // with K = Qzz C B + Psi_ZVbar, B = [beta I].
  MatrixXd K(kz, kx + 1);
  K.col(0) = model_.qzz * (model_.C * model_.beta) + d.psi_zv * model_.beta + d.psi_zu;
  K.rightCols(kx) = D;
  MatrixXd Gw = K.transpose() * (qzz_inv_ * K);
  Eigen::GeneralizedSelfAdjointEigenSolver<MatrixXd> ges;
  ges.compute(Gw, model_.sigma_vbar, Eigen::Ax_lBx | Eigen::ComputeEigenvectors);
  if (ges.info() != Eigen::Success) return d;
  d.alpha_l = std::max(ges.eigenvalues()(0), 0.0);

  MatrixXd Gl = Gx - d.alpha_l * model_.sigma_v;
  VectorXd bl = bx - d.alpha_l * model_.sigma_vu;
  if (sv_ratio(Gl) <= kRankTolerance) return d;
  d.beta_liml = Gl.ldlt().solve(bl);

  d.pi_2sls = QiD;
  const double denom = model_.sigma_u2 - 2.0 * d.beta_liml.dot(model_.sigma_vu) +
                       d.beta_liml.dot(model_.sigma_v * d.beta_liml);
  if (std::abs(denom) <= 1e-12 * std::max(1.0, model_.sigma_u2)) return d;
  VectorXd num_left = d.psi_zu - D * d.beta_liml;
  VectorXd num_right = model_.sigma_vu - model_.sigma_v * d.beta_liml;
  d.pi_liml = d.pi_2sls - qzz_inv_ * (num_left * num_right.transpose()) / denom;

  // Limit robust score statistic for an estimator limit (beta_t, pi_t):
  //   s = Psi_2u - (Q2'C + Psi_2V) beta_t
  //   Omega = S*' [F_u - 2 sum_j b_j F_uv_j + sum_jl b_j b_l F_vv_jl] S*
  //   S* = E2 - pi_t (pi_t' Qzz pi_t)^{-1} pi_t' Q2
  auto score_limit = [&](const VectorXd& beta_t, const MatrixXd& pi_t, double& stat) -> bool {
    VectorXd s = d.psi_zu.tail(k2) - (model_.q2.transpose() * model_.C +
                                      d.psi_zv.bottomRows(k2)) *
                                         beta_t;
    MatrixXd PtQP = pi_t.transpose() * model_.qzz * pi_t;
    if (sv_ratio(PtQP) <= kRankTolerance) return false;
    MatrixXd Sstar = MatrixXd::Zero(kz, k2);
    Sstar.bottomRows(k2) = MatrixXd::Identity(k2, k2);
    Sstar -= pi_t * PtQP.ldlt().solve(pi_t.transpose() * model_.q2);

    MatrixXd M = model_.fourth_u;
    for (int j = 0; j < kx; ++j) M -= 2.0 * beta_t(j) * model_.fourth_uv[static_cast<std::size_t>(j)];
    for (int j = 0; j < kx; ++j)
      for (int l = 0; l < kx; ++l)
        M += beta_t(j) * beta_t(l) * model_.fourth_vv[static_cast<std::size_t>(j)][static_cast<std::size_t>(l)];

    MatrixXd Om = Sstar.transpose() * M * Sstar;
    Om = 0.5 * (Om + Om.transpose()).eval();
    Eigen::LLT<MatrixXd> llt(Om);
    if (llt.info() != Eigen::Success) return false;
    stat = std::max(s.dot(llt.solve(s)), 0.0);
    return true;
  };

  if (!score_limit(d.beta_2sls, d.pi_2sls, d.j_limit)) return d;
  if (!score_limit(d.beta_liml, d.pi_liml, d.kp_limit)) return d;
  ok = true;
  return d;
}

LimitDraw LimitSampler::sample(RngStream& rng) const {
  for (;;) {
    bool ok = false;
    attempts_.fetch_add(1, std::memory_order_relaxed);
    LimitDraw d = try_sample(rng, ok);
    if (ok) return d;
    const long bad = degenerate_.fetch_add(1, std::memory_order_relaxed) + 1;
    const long total = attempts_.load(std::memory_order_relaxed);
    if (total >= 1000 && bad * 100 > total)
      throw SingularityError("limit-draw rejection rate exceeded 1% (" + std::to_string(bad) +
                             "/" + std::to_string(total) + ")");
  }
}

LimitDraw sample_limit_draw(const LimitModel& model, RngStream& rng) {
  LimitSampler sampler(model);
  return sampler.sample(rng);
}

LimitRates limit_rejection_rate(const LimitModel& model, long n_draws, double level,
                                std::uint64_t seed, int threads) {
  if (n_draws < 1000) throw ConfigError("need at least 1,000 draws");
  if (level <= 0.0 || level > 1.0) throw ConfigError("level must lie in (0, 1]");
  LimitSampler sampler(model);
  const int df = model.k_z() - model.k_x();
  const double cv = (level >= 1.0) ? 0.0 : chi2_quantile(1.0 - level, df);

  std::vector<unsigned char> j_reject(static_cast<std::size_t>(n_draws));
  std::vector<unsigned char> kp_reject(static_cast<std::size_t>(n_draws));
  parallel_for(n_draws, threads, [&](long i) {
    RngStream rng(seed, static_cast<std::uint64_t>(i));
    LimitDraw d = sampler.sample(rng);
    j_reject[static_cast<std::size_t>(i)] = d.j_limit > cv ? 1 : 0;
    kp_reject[static_cast<std::size_t>(i)] = d.kp_limit > cv ? 1 : 0;
  });

  LimitRates r;
  r.draws = n_draws;
  r.degenerate = sampler.degenerate_count();
  r.j_rate = std::accumulate(j_reject.begin(), j_reject.end(), 0.0) / static_cast<double>(n_draws);
  r.kp_rate =
      std::accumulate(kp_reject.begin(), kp_reject.end(), 0.0) / static_cast<double>(n_draws);
  return r;
}

LimitModel model_from_design(const SimulationConfig& config) {
  const int kz = config.k_z;
  const double rho = config.rho;
  const Design& design = config.design;
  if (kz < 2) throw ConfigError("k_z must be at least 2");
  if (std::abs(rho) >= 1.0) throw ConfigError("rho must lie in (-1, 1)");

  // Scalar designs: k_x = 1, beta = 0, Qzz = I. The shared conditional scale
  // g(z) makes E[u^2 zz'], E[uv zz'] and E[v^2 zz'] a common matrix G2 =
  // E[g(z)^2 zz'] times (1, rho, 1).
  MatrixXd G2(kz, kz);
  double sigma2 = 0.0;  // E[g^2] = E[u^2] = E[v^2]
  switch (design.kind) {
    case Design::Kind::Design1:
    case Design::Kind::Power: {
      const double a = design.alpha;
      const double e2a = gaussian_abs_moment(2.0 * a);
      const double e2a2 = gaussian_abs_moment(2.0 * a + 2.0);
      G2 = MatrixXd::Identity(kz, kz) * e2a;
      G2(0, 0) = e2a2;
      sigma2 = e2a;
      break;
    }
    case Design::Kind::Design2: {
      // E[exp(a 1'z) z z'] = exp(kz a^2/2) (I + a^2 11') by the Gaussian
      // shift identity E[exp(a'z) f(z)] = e^{a'a/2} E[f(z + a)].
      const double a = design.alpha;
      const double m = std::exp(0.5 * kz * a * a);
      G2 = m * (MatrixXd::Identity(kz, kz) +
                a * a * MatrixXd::Ones(kz, kz));
      sigma2 = m;
      break;
    }
  }

  LimitModel model;
  const double pi = calibrate_pi(design, kz, rho, config.mu2_target, config.n);
  model.C = std::sqrt(static_cast<double>(config.n)) * pi * MatrixXd::Ones(kz, 1);
  model.beta = VectorXd::Zero(1);
  model.qzz = MatrixXd::Identity(kz, kz);

  model.omega_z = MatrixXd(2 * kz, 2 * kz);
  model.omega_z.topLeftCorner(kz, kz) = G2;
  model.omega_z.topRightCorner(kz, kz) = rho * G2;
  model.omega_z.bottomLeftCorner(kz, kz) = rho * G2;
  model.omega_z.bottomRightCorner(kz, kz) = G2;

  model.sigma_v = MatrixXd::Constant(1, 1, sigma2);
  model.sigma_vu = VectorXd::Constant(1, rho * sigma2);
  model.sigma_u2 = sigma2;
  model.sigma_vbar = MatrixXd(2, 2);
  model.sigma_vbar << sigma2, rho * sigma2, rho * sigma2, sigma2;

  model.fourth_u = G2;
  model.fourth_uv = {rho * G2};
  model.fourth_vv = {{G2}};

  model.q2 = MatrixXd::Zero(kz, kz - 1);
  model.q2.bottomRows(kz - 1) = MatrixXd::Identity(kz - 1, kz - 1);
  model.q22 = MatrixXd::Identity(kz - 1, kz - 1);
  validate(model);
  return model;
}

NumericMoments design_moments_numeric(const Design& design, int k_z, double rho, long n_draws,
                                      std::uint64_t seed) {
  if (n_draws < 2) throw ConfigError("need at least 2 draws");
  RngStream rng(seed, 0);
  MatrixXd su = MatrixXd::Zero(k_z, k_z), su2 = MatrixXd::Zero(k_z, k_z);
  MatrixXd sv = MatrixXd::Zero(k_z, k_z), sv2 = MatrixXd::Zero(k_z, k_z);
  MatrixXd svu = MatrixXd::Zero(k_z, k_z), svu2 = MatrixXd::Zero(k_z, k_z);
  VectorXd z(k_z);
  const double rho_c = std::sqrt(1.0 - rho * rho);
  for (long t = 0; t < n_draws; ++t) {
    for (int j = 0; j < k_z; ++j) z(j) = rng.normal();
    const double e1 = rng.normal();
    const double e2 = rng.normal();
    double g = 1.0;
    if (design.kind == Design::Kind::Design2)
      g = std::sqrt(std::exp(design.alpha * z.sum()));
    else
      g = std::pow(std::abs(z(0)), design.alpha);
    const double u = g * e1;
    const double v = g * (rho * e1 + rho_c * e2);
    MatrixXd zz = z * z.transpose();
    su += u * u * zz;
    su2 += (u * u) * (u * u) * zz.cwiseProduct(zz);
    sv += v * v * zz;
    sv2 += (v * v) * (v * v) * zz.cwiseProduct(zz);
    svu += u * v * zz;
    svu2 += (u * v) * (u * v) * zz.cwiseProduct(zz);
  }
  const double N = static_cast<double>(n_draws);
  NumericMoments out;
  out.omega_zu = su / N;
  out.omega_zv = sv / N;
  out.omega_zvu = svu / N;
  auto max_se = [N](const MatrixXd& sumsq, const MatrixXd& mean) {
    MatrixXd var = sumsq / N - mean.cwiseProduct(mean);
    return std::sqrt(std::max(var.maxCoeff(), 0.0) / N);
  };
  out.max_standard_error = std::max({max_se(su2, out.omega_zu), max_se(sv2, out.omega_zv),
                                     max_se(svu2, out.omega_zvu)});
  return out;
}

}  // namespace weakiv
