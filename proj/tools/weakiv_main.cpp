// weakiv: estimation, overidentification testing, Monte Carlo and
// limit-distribution sampling for linear IV models, plus the EIS
// replication pipeline. JSON on stdout (or under --out), diagnostics on
// stderr, machine-friendly exit codes:
//   0 success, 2 argument error, 3 data error, 4 numerical error.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "weakiv/asymptotics.hpp"
#include "weakiv/covariance.hpp"
#include "weakiv/csv.hpp"
#include "weakiv/dataset.hpp"
#include "weakiv/design.hpp"
#include "weakiv/distributions.hpp"
#include "weakiv/empirics.hpp"
#include "weakiv/errors.hpp"
#include "weakiv/estimators.hpp"
#include "weakiv/inference.hpp"
#include "weakiv/linalg.hpp"
#include "weakiv/simulation.hpp"
#include "weakiv/version.hpp"

namespace {

using json = nlohmann::ordered_json;
using namespace weakiv;

constexpr int kExitOk = 0;
constexpr int kExitArgs = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

struct CommandContext {
  std::string command;
  std::vector<std::string> argv;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  std::vector<std::string> outputs;

  json manifest(std::uint64_t seed, bool has_seed) const {
    json m;
    m["command"] = command;
    m["argv"] = argv;
    if (has_seed) m["seed"] = seed;
    m["library_version"] = kVersion;
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    m["wall_time_s"] = secs;
    m["outputs"] = outputs;
    return m;
  }
};

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write " + path);
  out << content;
}

// Emits the result document: to stdout with the manifest embedded, or to
// out_path with a sibling manifest.json.
void emit(CommandContext& ctx, json doc, const std::string& out_path, std::uint64_t seed,
          bool has_seed) {
  if (out_path.empty()) {
    doc["manifest"] = ctx.manifest(seed, has_seed);
    std::cout << doc.dump(2) << "\n";
    return;
  }
  std::filesystem::path p(out_path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  write_file(out_path, doc.dump(2) + "\n");
  ctx.outputs.push_back(out_path);
  const std::string manifest_path =
      (p.has_parent_path() ? p.parent_path() / "manifest.json" : std::filesystem::path("manifest.json"))
          .string();
  write_file(manifest_path, ctx.manifest(seed, has_seed).dump(2) + "\n");
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> parts;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) parts.push_back(item);
  }
  return parts;
}

CovarianceSpec parse_cov(const std::string& s, int k_x) {
  if (s == "hc0") return CovarianceSpec::hc0();
  if (s == "hc1") return CovarianceSpec::hc1(k_x);
  if (s == "homo") return CovarianceSpec::homoskedastic();
  if (s.rfind("nw:", 0) == 0) {
    const int lags = std::stoi(s.substr(3));
    if (lags < 0) throw CLI::ValidationError("--cov", "nw lag count must be nonnegative");
    return CovarianceSpec::newey_west(lags);
  }
  throw CLI::ValidationError("--cov", "expected hc0, hc1, homo or nw:L");
}

std::string cov_name(const CovarianceSpec& spec) {
  switch (spec.kind) {
    case CovarianceSpec::Kind::Homoskedastic: return "homoskedastic";
    case CovarianceSpec::Kind::HC0: return "hc0";
    case CovarianceSpec::Kind::HC1: return "hc1";
    case CovarianceSpec::Kind::NeweyWest: return "nw:" + std::to_string(spec.lags);
  }
  return "?";
}

Design parse_design(const std::string& s) {
  if (s.rfind("1:", 0) == 0) return Design::design1(std::stod(s.substr(2)));
  if (s.rfind("2:", 0) == 0) return Design::design2(std::stod(s.substr(2)));
  if (s.rfind("power:", 0) == 0) {
    auto parts = split_list(s.substr(6));
    if (parts.size() != 2)
      throw CLI::ValidationError("--design", "power design takes alpha,omega");
    return Design::power(std::stod(parts[0]), std::stod(parts[1]));
  }
  throw CLI::ValidationError("--design", "expected 1:A, 2:A or power:A,W");
}

std::string design_name(const Design& d) {
  switch (d.kind) {
    case Design::Kind::Design1: return "design1";
    case Design::Kind::Design2: return "design2";
    case Design::Kind::Power: return "power";
  }
  return "?";
}

std::string method_name(Method m) {
  switch (m) {
    case Method::TwoSLS: return "2sls";
    case Method::LIML: return "liml";
    case Method::KClass: return "kclass";
    case Method::GMM2: return "gmm2";
  }
  return "?";
}

std::string test_name(TestKind t) {
  switch (t) {
    case TestKind::HansenJ: return "j";
    case TestKind::RobustScore2SLS: return "score-2sls";
    case TestKind::RobustScoreLIML: return "score-liml";
    case TestKind::KP: return "kp";
    case TestKind::Sargan: return "sargan";
    case TestKind::EffectiveF: return "feff";
  }
  return "?";
}

Eigen::VectorXd column_from_table(const CsvTable& table, const std::string& name) {
  auto idx = table.column_index(name);
  if (!idx) throw SchemaError("column '" + name + "' not found");
  Eigen::VectorXd v(static_cast<Eigen::Index>(table.rows.size()));
  for (std::size_t i = 0; i < table.rows.size(); ++i)
    v(static_cast<Eigen::Index>(i)) =
        csv_parse_double(table.rows[i][*idx], "column " + name + " row " + std::to_string(i + 2));
  return v;
}

IVDataset dataset_from_csv(const std::string& path, const std::string& y_col,
                           const std::vector<std::string>& x_cols,
                           const std::vector<std::string>& z_cols,
                           const std::vector<std::string>& exog_cols) {
  CsvTable table = read_csv(path);
  IVDataset d;
  d.y = column_from_table(table, y_col);
  d.X.resize(d.y.size(), static_cast<Eigen::Index>(x_cols.size()));
  for (std::size_t j = 0; j < x_cols.size(); ++j)
    d.X.col(static_cast<Eigen::Index>(j)) = column_from_table(table, x_cols[j]);
  d.Z.resize(d.y.size(), static_cast<Eigen::Index>(z_cols.size()));
  for (std::size_t j = 0; j < z_cols.size(); ++j)
    d.Z.col(static_cast<Eigen::Index>(j)) = column_from_table(table, z_cols[j]);
  if (!exog_cols.empty()) {
    Eigen::MatrixXd E(d.y.size(), static_cast<Eigen::Index>(exog_cols.size()));
    for (std::size_t j = 0; j < exog_cols.size(); ++j)
      E.col(static_cast<Eigen::Index>(j)) = column_from_table(table, exog_cols[j]);
    d.X_exog = E;
  }
  return d;
}

// Robust sandwich variance of beta_hat for k-class estimators:
//   H^{-1} X'Z (Z'Z)^{-1} S (Z'Z)^{-1} Z'X H^{-1},  H = X'PzX - alpha X'X,
// and the efficient-GMM form (G' S^{-1} G)^{-1}, G = Z'X, for two-step GMM.
Eigen::MatrixXd robust_variance(const IVDataset& d, const EstimationResult& est,
                                const CovarianceSpec& spec) {
  Eigen::MatrixXd ZtZ = d.Z.transpose() * d.Z;
  Eigen::MatrixXd ZtX = d.Z.transpose() * d.X;
  Eigen::MatrixXd S = meat(d.Z, est.residuals, spec);
  if (est.method == Method::GMM2) {
    Eigen::MatrixXd A = ZtX.transpose() * chol_solve(S, ZtX);
    return A.inverse();
  }
  Eigen::MatrixXd pi_ols = chol_solve(ZtZ, ZtX);
  Eigen::MatrixXd H = ZtX.transpose() * pi_ols;
  if (est.alpha != 0.0) H -= est.alpha * (d.X.transpose() * d.X);
  Eigen::MatrixXd filling = pi_ols.transpose() * S * pi_ols;
  Eigen::MatrixXd Hinv = H.inverse();
  return Hinv * filling * Hinv.transpose();
}

json estimation_to_json(const EstimationResult& est, const IVDataset& d,
                        const CovarianceSpec& spec) {
  json out;
  out["method"] = method_name(est.method);
  out["beta_hat"] = std::vector<double>(est.beta_hat.data(), est.beta_hat.data() + est.beta_hat.size());
  out["alpha"] = est.alpha;
  Eigen::MatrixXd V = robust_variance(d, est, spec);
  std::vector<double> se;
  for (Eigen::Index j = 0; j < V.rows(); ++j) se.push_back(std::sqrt(std::max(V(j, j), 0.0)));
  out["robust_se"] = se;
  out["cov"] = cov_name(spec);
  std::vector<std::vector<double>> pi;
  for (Eigen::Index i = 0; i < est.pi_hat.rows(); ++i)
    pi.emplace_back(est.pi_hat.row(i).data(), est.pi_hat.row(i).data() + est.pi_hat.cols());
  out["pi_hat"] = pi;
  out["n"] = d.n_obs();
  out["k_x"] = d.k_x();
  out["k_z"] = d.k_z();
  return out;
}

json test_to_json(const TestResult& t) {
  json out;
  out["test"] = test_name(t.test);
  out["statistic"] = t.statistic;
  out["df"] = t.df;
  out["p_value"] = t.p_value;
  if (!t.partition_cols.empty()) out["partition_cols"] = t.partition_cols;
  return out;
}

json summary_to_json(const SimulationConfig& cfg, const SimulationSummary& s) {
  json out;
  out["design"] = design_name(cfg.design);
  out["alpha"] = cfg.design.alpha;
  if (cfg.design.kind == Design::Kind::Power) out["omega"] = cfg.design.omega;
  out["n"] = cfg.n;
  out["k_z"] = cfg.k_z;
  out["rho"] = cfg.rho;
  out["mu2"] = cfg.mu2_target;
  out["replications"] = cfg.replications;
  out["seed"] = cfg.seed;
  json rej = json::array();
  for (const LevelRates& lr : s.rejection) {
    json r;
    r["level"] = lr.level;
    r["j_rate"] = lr.j_rate;
    r["kp_rate"] = lr.kp_rate;
    rej.push_back(r);
  }
  out["rejection"] = rej;
  out["median_bias_2sls"] = s.median_bias_2sls;
  out["median_bias_liml"] = s.median_bias_liml;
  out["range_90_10_2sls"] = s.range_90_10_2sls;
  out["range_90_10_liml"] = s.range_90_10_liml;
  out["pi_used"] = s.pi_used;
  out["replications_completed"] = s.replications_completed;
  out["degenerate_count"] = s.degenerate_count;
  out["flagged"] = s.flagged;
  return out;
}

std::string csv_header_for_summary(const std::vector<double>& levels) {
  std::ostringstream os;
  os << "design,alpha,omega,n,k_z,rho,mu2,replications,seed";
  for (double level : levels) {
    os << ",j_rate_" << level << ",kp_rate_" << level;
  }
  os << ",median_bias_2sls,median_bias_liml,range_90_10_2sls,range_90_10_liml,"
        "pi_used,replications_completed,degenerate_count\n";
  return os.str();
}

std::string csv_row_for_summary(const SimulationConfig& cfg, const SimulationSummary& s) {
  std::ostringstream os;
  os.precision(10);
  os << design_name(cfg.design) << ',' << cfg.design.alpha << ','
     << (cfg.design.kind == Design::Kind::Power ? cfg.design.omega : 0.0) << ',' << cfg.n << ','
     << cfg.k_z << ',' << cfg.rho << ',' << cfg.mu2_target << ',' << cfg.replications << ','
     << cfg.seed;
  for (const LevelRates& lr : s.rejection) os << ',' << lr.j_rate << ',' << lr.kp_rate;
  os << ',' << s.median_bias_2sls << ',' << s.median_bias_liml << ',' << s.range_90_10_2sls << ','
     << s.range_90_10_liml << ',' << s.pi_used << ',' << s.replications_completed << ','
     << s.degenerate_count << "\n";
  return os.str();
}

int map_error_to_exit(const Error& e) {
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const UnsupportedError*>(&e))
    return kExitArgs;
  if (dynamic_cast<const ParseError*>(&e) || dynamic_cast<const GapError*>(&e) ||
      dynamic_cast<const SchemaError*>(&e) || dynamic_cast<const DimensionError*>(&e) ||
      dynamic_cast<const RankError*>(&e) || dynamic_cast<const NonFiniteError*>(&e))
    return kExitData;
  return kExitNumeric;  // Singularity, Convergence, Partition, Domain
}

// ---------------------------------------------------------------------------

int cmd_estimate(CommandContext& ctx, const std::string& data, const std::string& y_col,
                 const std::string& x_list, const std::string& z_list, const std::string& exog_list,
                 const std::string& method, const std::string& cov, const std::string& out_path) {
  IVDataset d = dataset_from_csv(data, y_col, split_list(x_list), split_list(z_list),
                                 split_list(exog_list));
  if (d.X_exog) d = partial_out(d);
  validate(d);
  CovarianceSpec spec = parse_cov(cov, static_cast<int>(d.k_x()));

  EstimationResult est;
  if (method == "2sls") {
    est = estimate_2sls(d);
  } else if (method == "liml") {
    est = estimate_liml(d);
  } else if (method.rfind("kclass:", 0) == 0) {
    est = estimate_kclass(d, std::stod(method.substr(7)));
  } else if (method == "gmm2") {
    EstimationResult first = estimate_2sls(d);
    est = estimate_gmm2(d, first, meat(d.Z, first.residuals, spec));
  } else {
    throw CLI::ValidationError("--method", "expected 2sls, liml, kclass:A or gmm2");
  }
  emit(ctx, estimation_to_json(est, d, spec), out_path, 0, false);
  return kExitOk;
}

int cmd_test(CommandContext& ctx, const std::string& data, const std::string& y_col,
             const std::string& x_list, const std::string& z_list, const std::string& exog_list,
             const std::string& tests_list, const std::string& cov, const std::string& out_path) {
  IVDataset d = dataset_from_csv(data, y_col, split_list(x_list), split_list(z_list),
                                 split_list(exog_list));
  if (d.X_exog) d = partial_out(d);
  validate(d);
  CovarianceSpec spec = parse_cov(cov, static_cast<int>(d.k_x()));

  json arr = json::array();
  for (const std::string& name : split_list(tests_list)) {
    if (name == "j") {
      arr.push_back(test_to_json(hansen_j(d, spec)));
    } else if (name == "kp") {
      arr.push_back(test_to_json(kp_test(d, spec)));
    } else if (name == "score-2sls") {
      arr.push_back(test_to_json(robust_score(d, estimate_2sls(d), spec)));
    } else if (name == "sargan") {
      arr.push_back(test_to_json(sargan_test(d, estimate_2sls(d))));
    } else if (name == "feff") {
      EffectiveFResult f = effective_f(d, spec);
      json t = test_to_json(f.result);
      t.erase("p_value");  // not a chi-square test
      t["kappa"] = f.kappa;
      t["k_eff"] = f.k_eff;
      arr.push_back(t);
    } else {
      throw CLI::ValidationError("--tests", "unknown test '" + name + "'");
    }
  }
  json doc;
  doc["tests"] = arr;
  emit(ctx, doc, out_path, 0, false);
  return kExitOk;
}

int cmd_simulate(CommandContext& ctx, const std::string& design_str, int kz, double rho,
                 const std::string& mu2_list, int n, long reps, std::uint64_t seed,
                 const std::string& levels_list, int threads, const std::string& out_dir) {
  SimulationConfig base;
  base.design = parse_design(design_str);
  base.k_z = kz;
  base.rho = rho;
  base.n = n;
  base.replications = reps;
  base.seed = seed;
  base.threads = threads;
  if (!levels_list.empty()) {
    base.levels.clear();
    for (const std::string& s : split_list(levels_list)) base.levels.push_back(std::stod(s));
  }
  std::vector<double> mu2s;
  for (const std::string& s : split_list(mu2_list)) mu2s.push_back(std::stod(s));
  if (mu2s.empty()) throw ConfigError("--mu2 list is empty");
  std::sort(mu2s.begin(), mu2s.end());

  std::filesystem::create_directories(out_dir);
  std::ostringstream csv;
  csv << csv_header_for_summary(base.levels);
  json cells = json::array();
  for (double mu2 : mu2s) {
    SimulationConfig cfg = base;
    cfg.mu2_target = mu2;
    SimulationSummary s = run_design(cfg);
    csv << csv_row_for_summary(cfg, s);
    json cell = summary_to_json(cfg, s);
    std::ostringstream name;
    name << "cell_mu2_" << mu2 << ".json";
    const std::string cell_path = (std::filesystem::path(out_dir) / name.str()).string();
    write_file(cell_path, cell.dump(2) + "\n");
    ctx.outputs.push_back(cell_path);
    cells.push_back(cell);
  }
  const std::string csv_path = (std::filesystem::path(out_dir) / "simulate.csv").string();
  write_file(csv_path, csv.str());
  ctx.outputs.push_back(csv_path);
  write_file((std::filesystem::path(out_dir) / "manifest.json").string(),
             ctx.manifest(seed, true).dump(2) + "\n");
  std::cerr << "wrote " << ctx.outputs.size() << " files to " << out_dir << "\n";
  return kExitOk;
}

int cmd_limit(CommandContext& ctx, const std::string& design_str, int kz, double rho, double mu2,
              int n, long draws, double level, std::uint64_t seed, int threads,
              const std::string& out_path) {
  SimulationConfig cfg;
  cfg.design = parse_design(design_str);
  cfg.k_z = kz;
  cfg.rho = rho;
  cfg.mu2_target = mu2;
  cfg.n = n;
  LimitModel model = model_from_design(cfg);
  LimitRates rates = limit_rejection_rate(model, draws, level, seed, threads);

  // Draw-summary quantiles from a fresh deterministic pass.
  LimitSampler sampler(model);
  std::vector<double> js(static_cast<std::size_t>(draws)), kps(static_cast<std::size_t>(draws)),
      alphas(static_cast<std::size_t>(draws));
  parallel_for(draws, threads, [&](long i) {
    RngStream rng(seed, static_cast<std::uint64_t>(i));
    LimitDraw dr = sampler.sample(rng);
    js[static_cast<std::size_t>(i)] = dr.j_limit;
    kps[static_cast<std::size_t>(i)] = dr.kp_limit;
    alphas[static_cast<std::size_t>(i)] = dr.alpha_l;
  });
  auto quantiles = [](std::vector<double> v) {
    json q;
    q["p50"] = quantile(v, 0.50);
    q["p90"] = quantile(v, 0.90);
    q["p95"] = quantile(v, 0.95);
    q["p99"] = quantile(v, 0.99);
    return q;
  };

  json doc;
  doc["design"] = design_name(cfg.design);
  doc["alpha"] = cfg.design.alpha;
  doc["k_z"] = kz;
  doc["rho"] = rho;
  doc["mu2"] = mu2;
  doc["draws"] = draws;
  doc["level"] = level;
  doc["j_rate"] = rates.j_rate;
  doc["kp_rate"] = rates.kp_rate;
  doc["degenerate"] = rates.degenerate;
  doc["j_quantiles"] = quantiles(js);
  doc["kp_quantiles"] = quantiles(kps);
  doc["alpha_l_quantiles"] = quantiles(alphas);
  emit(ctx, doc, out_path, seed, true);
  return kExitOk;
}

int cmd_eis(CommandContext& ctx, const std::string& data, const std::string& schema,
            const std::string& normalization, int hac_lags, const std::string& instruments,
            const std::string& out_dir) {
  std::vector<CountryPanel> panels;
  if (schema == "yogo") {
    panels = load_panels(data, PanelSchema::Yogo);
  } else if (schema == "housing") {
    const int own_lag = (instruments == "lag1") ? 1 : 2;
    panels = build_housing_panels(data, own_lag);
  } else {
    throw CLI::ValidationError("--schema", "expected yogo or housing");
  }

  std::vector<Normalization> norms;
  if (normalization == "psi") {
    norms = {Normalization::PsiOnR};
  } else if (normalization == "invpsi") {
    norms = {Normalization::InvPsiOnDc};
  } else if (normalization == "both") {
    norms = {Normalization::PsiOnR, Normalization::InvPsiOnDc};
  } else {
    throw CLI::ValidationError("--normalization", "expected psi, invpsi or both");
  }

  auto hac_for = [&](const CountryPanel& p) {
    if (hac_lags >= 0) return hac_lags;
    if (schema == "yogo") return p.country == "USA" ? 6 : 4;
    return 4;
  };

  std::ostringstream csv;
  csv << "normalization,country,period,f_eff,kappa,beta_2sls,beta_liml,j,kp\n";
  csv.precision(10);
  json rows = json::array();
  for (Normalization norm : norms) {
    for (const CountryPanel& p : panels) {
      EISRow row = run_eis_row(p, norm, hac_for(p));
      const std::string norm_name = (norm == Normalization::PsiOnR) ? "psi" : "invpsi";
      csv << norm_name << ',' << row.country << ',' << p.period_start << '-' << p.period_end << ','
          << row.f_eff << ',' << row.kappa << ',' << row.beta_2sls << ',' << row.beta_liml << ','
          << row.j_stat << ',' << row.kp_stat << "\n";
      json r;
      r["normalization"] = norm_name;
      r["country"] = row.country;
      r["period_start"] = p.period_start;
      r["period_end"] = p.period_end;
      r["f_eff"] = row.f_eff;
      r["kappa"] = row.kappa;
      r["beta_2sls"] = row.beta_2sls;
      r["beta_liml"] = row.beta_liml;
      r["j"] = row.j_stat;
      r["kp"] = row.kp_stat;
      rows.push_back(r);
    }
  }

  std::filesystem::create_directories(out_dir);
  const std::string csv_path = (std::filesystem::path(out_dir) / "eis_report.csv").string();
  write_file(csv_path, csv.str());
  ctx.outputs.push_back(csv_path);
  json doc;
  doc["schema"] = schema;
  doc["rows"] = rows;
  const std::string json_path = (std::filesystem::path(out_dir) / "eis_report.json").string();
  write_file(json_path, doc.dump(2) + "\n");
  ctx.outputs.push_back(json_path);
  write_file((std::filesystem::path(out_dir) / "manifest.json").string(),
             ctx.manifest(0, false).dump(2) + "\n");
  std::cerr << "wrote " << ctx.outputs.size() << " files to " << out_dir << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Heteroskedasticity-robust IV estimation and overidentification testing"};
  app.require_subcommand(1);

  CommandContext ctx;
  for (int i = 0; i < argc; ++i) ctx.argv.push_back(argv[i]);

  // estimate
  std::string data, y_col, x_list, z_list, exog_list, method = "2sls", cov = "hc0", out_path;
  auto* est = app.add_subcommand("estimate", "Point estimation on a CSV dataset");
  est->add_option("--data", data, "CSV file")->required();
  est->add_option("--y", y_col, "outcome column")->required();
  est->add_option("--x", x_list, "endogenous regressor columns (comma separated)")->required();
  est->add_option("--z", z_list, "instrument columns (comma separated)")->required();
  est->add_option("--exog", exog_list, "exogenous control columns (partialled out)");
  est->add_option("--method", method, "2sls | liml | kclass:A | gmm2");
  est->add_option("--cov", cov, "hc0 | hc1 | homo | nw:L");
  est->add_option("--out", out_path, "output JSON path (default stdout)");

  // test
  std::string tests_list = "j,kp";
  auto* tst = app.add_subcommand("test", "Overidentification and instrument-strength tests");
  tst->add_option("--data", data, "CSV file")->required();
  tst->add_option("--y", y_col, "outcome column")->required();
  tst->add_option("--x", x_list, "endogenous regressor columns")->required();
  tst->add_option("--z", z_list, "instrument columns")->required();
  tst->add_option("--exog", exog_list, "exogenous control columns");
  tst->add_option("--tests", tests_list, "comma list: j,kp,score-2sls,sargan,feff");
  tst->add_option("--cov", cov, "hc0 | hc1 | homo | nw:L");
  tst->add_option("--out", out_path, "output JSON path (default stdout)");

  // simulate
  std::string design_str = "1:0.5", mu2_list = "4", levels_list;
  int kz = 2, n = 120, threads = 0;
  double rho = 0.5;
  long reps = 0, draws = 10000;
  std::uint64_t seed = 0;
  std::string out_dir = "weakiv_out";
  auto* sim = app.add_subcommand("simulate", "Monte Carlo rejection-rate experiments");
  sim->add_option("--design", design_str, "1:A | 2:A | power:A,W")->required();
  sim->add_option("--kz", kz, "number of instruments")->required();
  sim->add_option("--rho", rho, "endogeneity correlation")->required();
  sim->add_option("--mu2", mu2_list, "comma list of concentration targets")->required();
  sim->add_option("--n", n, "sample size per replication");
  sim->add_option("--reps", reps, "replications per cell")->required();
  sim->add_option("--seed", seed, "rng seed")->required();
  sim->add_option("--levels", levels_list, "comma list of test levels (default 0.10,0.05,0.01)");
  sim->add_option("--threads", threads, "worker cap (default WEAKIV_THREADS or hardware)");
  sim->add_option("--out", out_dir, "output directory")->required();

  // limit
  double mu2_single = 4.0, level = 0.05;
  auto* lim = app.add_subcommand("limit", "Weak-instrument limiting distribution sampling");
  lim->add_option("--design", design_str, "1:A | 2:A | power:A,W")->required();
  lim->add_option("--kz", kz, "number of instruments")->required();
  lim->add_option("--rho", rho, "endogeneity correlation")->required();
  lim->add_option("--mu2", mu2_single, "concentration target")->required();
  lim->add_option("--n", n, "nominal sample size (enters only via calibration checks)");
  lim->add_option("--draws", draws, "number of limit draws")->required();
  lim->add_option("--level", level, "test level");
  lim->add_option("--seed", seed, "rng seed")->required();
  lim->add_option("--threads", threads, "worker cap");
  lim->add_option("--out", out_path, "output JSON path (default stdout)");

  // eis
  std::string schema = "yogo", normalization = "both", instruments = "lag1";
  int hac_lags = -1;
  auto* eis = app.add_subcommand("eis", "EIS replication pipeline");
  eis->add_option("--data", data, "CSV file")->required();
  eis->add_option("--schema", schema, "yogo | housing")->required();
  eis->add_option("--normalization", normalization, "psi | invpsi | both");
  eis->add_option("--hac-lags", hac_lags, "Newey-West lags (default: 6 for USA yogo, else 4)");
  eis->add_option("--instruments", instruments, "housing instrument set: lag1 | lag2");
  eis->add_option("--out", out_dir, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitArgs;
  }

  try {
    if (est->parsed()) {
      ctx.command = "estimate";
      return cmd_estimate(ctx, data, y_col, x_list, z_list, exog_list, method, cov, out_path);
    }
    if (tst->parsed()) {
      ctx.command = "test";
      return cmd_test(ctx, data, y_col, x_list, z_list, exog_list, tests_list, cov, out_path);
    }
    if (sim->parsed()) {
      ctx.command = "simulate";
      return cmd_simulate(ctx, design_str, kz, rho, mu2_list, n, reps, seed, levels_list, threads,
                          out_dir);
    }
    if (lim->parsed()) {
      ctx.command = "limit";
      return cmd_limit(ctx, design_str, kz, rho, mu2_single, n, draws, level, seed, threads,
                       out_path);
    }
    if (eis->parsed()) {
      ctx.command = "eis";
      return cmd_eis(ctx, data, schema, normalization, hac_lags, instruments, out_dir);
    }
  } catch (const CLI::ValidationError& e) {
    std::cerr << e.what() << "\n";
    return kExitArgs;
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return map_error_to_exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  }
  return kExitArgs;
}
