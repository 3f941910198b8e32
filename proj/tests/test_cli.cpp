#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "schema_check.hpp"
#include "testutil.hpp"
#include "weakiv/covariance.hpp"
#include "weakiv/dataset.hpp"
#include "weakiv/estimators.hpp"
#include "weakiv/inference.hpp"
#include "weakiv/rng.hpp"

using json = nlohmann::json;
using namespace weakiv;

namespace {

const std::string kCli = WEAKIV_CLI_PATH;
const std::filesystem::path kSchemaDir = WEAKIV_SCHEMA_DIR;

struct RunResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RunResult run_cli(const std::string& args) {
  auto dir = std::filesystem::temp_directory_path();
  auto out_path = dir / "weakiv_cli_stdout.txt";
  auto err_path = dir / "weakiv_cli_stderr.txt";
  const std::string cmd =
      kCli + " " + args + " > " + out_path.string() + " 2> " + err_path.string();
  const int status = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out_path);
  r.err = slurp(err_path);
  return r;
}

json load_schema(const std::string& name) {
  return json::parse(slurp(kSchemaDir / name));
}

// Fixture CSV: three valid instruments, one duplicated column for rank
// failures, a second regressor for the k_x > 1 path.
std::string write_fixture_csv() {
  RngStream rng(7001, 0);
  const int n = 160;
  std::ostringstream os;
  os.precision(17);
  os << "yv,xv,x2,z1,z2,z3,zdup,ones\n";
  for (int i = 0; i < n; ++i) {
    const double z1 = rng.normal(), z2 = rng.normal(), z3 = rng.normal();
    const double v = 0.5 * rng.normal();
    const double u = 0.4 * v + 0.3 * rng.normal();
    const double noise = rng.normal();
    const double x = 0.4 * z1 + 0.3 * z2 + 0.2 * z3 + v;
    const double x2 = 0.5 * z2 + 0.3 * noise;
    const double y = 0.6 * x + u + 0.1;
    os << y << ',' << x << ',' << x2 << ',' << z1 << ',' << z2 << ',' << z3 << ',' << z1 << ",1\n";
  }
  auto path = std::filesystem::temp_directory_path() / "weakiv_cli_fixture.csv";
  std::ofstream f(path);
  f << os.str();
  return path.string();
}

const std::string kData = write_fixture_csv();
const std::string kBase = "--data " + kData + " --y yv --x xv --z z1,z2,z3 --exog ones";

IVDataset fixture_dataset() {
  RngStream rng(7001, 0);
  const int n = 160;
  IVDataset d;
  d.y.resize(n);
  d.X.resize(n, 1);
  d.Z.resize(n, 3);
  for (int i = 0; i < n; ++i) {
    const double z1 = rng.normal(), z2 = rng.normal(), z3 = rng.normal();
    const double v = 0.5 * rng.normal();
    const double u = 0.4 * v + 0.3 * rng.normal();
    (void)rng.normal();  // x2 noise draw
    const double x = 0.4 * z1 + 0.3 * z2 + 0.2 * z3 + v;
    d.y(i) = 0.6 * x + u + 0.1;
    d.X(i, 0) = x;
    d.Z.row(i) << z1, z2, z3;
  }
  d.X_exog = Eigen::MatrixXd::Ones(n, 1);
  return partial_out(d);
}

}  // namespace

TEST_CASE("estimate runs, validates against its schema and matches the library") {
  RunResult r = run_cli("estimate " + kBase + " --method liml --cov hc0");
  REQUIRE(r.exit_code == 0);
  json doc = json::parse(r.out);
  schema_check::validate(doc, load_schema("estimate.schema.json"));
  schema_check::validate(doc["manifest"], load_schema("manifest.schema.json"));

  EstimationResult expect = estimate_liml(fixture_dataset());
  CHECK(doc["beta_hat"][0].get<double>() ==
        doctest::Approx(expect.beta_hat(0)).epsilon(1e-10));
  CHECK(doc["alpha"].get<double>() == doctest::Approx(expect.alpha).epsilon(1e-10));
}

TEST_CASE("missing required arguments exit with code 2") {
  RunResult r = run_cli("estimate --data " + kData + " --y yv --x xv");
  CHECK(r.exit_code == 2);
}

TEST_CASE("collinear instruments exit with code 3 and a RankError diagnostic") {
  RunResult r = run_cli("estimate --data " + kData +
                        " --y yv --x xv --z z1,z2,zdup --method 2sls");
  CHECK(r.exit_code == 3);
  CHECK(r.err.find("RankError") != std::string::npos);
  CHECK(r.out.empty());
}

TEST_CASE("test subcommand: J equals the 2SLS robust score end to end") {
  RunResult r = run_cli("test " + kBase + " --tests j,score-2sls,kp,sargan,feff --cov hc0");
  REQUIRE(r.exit_code == 0);
  json doc = json::parse(r.out);
  schema_check::validate(doc, load_schema("test.schema.json"));
  const double j = doc["tests"][0]["statistic"].get<double>();
  const double score = doc["tests"][1]["statistic"].get<double>();
  CHECK(std::abs(j - score) <= 1e-8 * std::max(1.0, j));
  CHECK(doc["tests"][4].contains("kappa"));
}

TEST_CASE("feff with more than one endogenous regressor exits with code 2") {
  RunResult r = run_cli("test --data " + kData +
                        " --y yv --x xv,x2 --z z1,z2,z3 --tests feff");
  CHECK(r.exit_code == 2);
  CHECK(r.err.find("UnsupportedError") != std::string::npos);
}

TEST_CASE("simulate rejects zero replications with exit 2") {
  RunResult r = run_cli("simulate --design 1:0.5 --kz 2 --rho 0.5 --mu2 4 --reps 0 --seed 1 "
                        "--out /tmp/weakiv_cli_sim0");
  CHECK(r.exit_code == 2);
}

TEST_CASE("simulate writes sorted, schema-valid, thread-invariant outputs") {
  auto out1 = std::filesystem::temp_directory_path() / "weakiv_cli_sim1";
  auto out2 = std::filesystem::temp_directory_path() / "weakiv_cli_sim2";
  std::filesystem::remove_all(out1);
  std::filesystem::remove_all(out2);
  const std::string common =
      "simulate --design 1:0.5 --kz 2 --rho 0.5 --mu2 8,2,4 --n 120 --reps 300 --seed 11 ";
  RunResult r1 = run_cli(common + "--threads 1 --out " + out1.string());
  RunResult r2 = run_cli(common + "--threads 4 --out " + out2.string());
  REQUIRE(r1.exit_code == 0);
  REQUIRE(r2.exit_code == 0);

  const std::string csv1 = slurp(out1 / "simulate.csv");
  const std::string csv2 = slurp(out2 / "simulate.csv");
  CHECK(csv1 == csv2);  // bit-reproducible across worker counts

  // One row per mu2 cell, sorted ascending.
  std::vector<std::string> lines;
  std::stringstream ss(csv1);
  std::string line;
  while (std::getline(ss, line))
    if (!line.empty()) lines.push_back(line);
  REQUIRE(lines.size() == 4);  // header + 3 cells
  CHECK(lines[1].find("design1,0.5,0,120,2,0.5,2,") == 0);
  CHECK(lines[2].find("design1,0.5,0,120,2,0.5,4,") == 0);
  CHECK(lines[3].find("design1,0.5,0,120,2,0.5,8,") == 0);

  json cell = json::parse(slurp(out1 / "cell_mu2_4.json"));
  schema_check::validate(cell, load_schema("simulate_cell.schema.json"));
  json manifest = json::parse(slurp(out1 / "manifest.json"));
  schema_check::validate(manifest, load_schema("manifest.schema.json"));
}

TEST_CASE("limit emits schema-valid output and is seed-reproducible") {
  const std::string common = "limit --design 1:0.5 --kz 2 --rho 0.95 --mu2 4 --draws 2000 "
                             "--level 0.05 --seed 99";
  RunResult a = run_cli(common);
  RunResult b = run_cli(common + " --threads 2");
  REQUIRE(a.exit_code == 0);
  json da = json::parse(a.out);
  json db = json::parse(b.out);
  schema_check::validate(da, load_schema("limit.schema.json"));
  CHECK(da["j_rate"] == db["j_rate"]);
  CHECK(da["kp_quantiles"]["p95"] == db["kp_quantiles"]["p95"]);
}

TEST_CASE("eis pipeline over a synthetic multi-country yogo file") {
  // Two countries in one file exercising the country-column splitting.
  RngStream rng(7500, 0);
  std::ostringstream os;
  os.precision(17);
  os << "country,date,dc,r,z_nominal_rate,z_inflation,z_dc_lag,z_dp\n";
  for (const char* country : {"AAA", "BBB"}) {
    for (int t = 0; t < 90; ++t) {
      const double z1 = rng.normal(), z2 = rng.normal(), z3 = rng.normal(), z4 = rng.normal();
      const double v = 0.5 * rng.normal();
      const double u = 0.4 * v + 0.3 * rng.normal();
      const double rr = 0.3 * (z1 + z2 + z3 + z4) + v;
      os << country << ',' << 1970 + t / 4 << ".Q" << t % 4 + 1 << ',' << 0.4 * rr + u << ','
         << rr << ',' << z1 << ',' << z2 << ',' << z3 << ',' << z4 << "\n";
    }
  }
  auto csv_path = std::filesystem::temp_directory_path() / "weakiv_cli_yogo.csv";
  std::ofstream f(csv_path);
  f << os.str();
  f.close();

  auto out = std::filesystem::temp_directory_path() / "weakiv_cli_eis";
  std::filesystem::remove_all(out);
  RunResult r = run_cli("eis --data " + csv_path.string() +
                        " --schema yogo --normalization both --out " + out.string());
  REQUIRE(r.exit_code == 0);
  json doc = json::parse(slurp(out / "eis_report.json"));
  schema_check::validate(doc, load_schema("eis.schema.json"));
  REQUIRE(doc["rows"].size() == 4);  // 2 countries x 2 normalizations

  // KP equality across normalizations, surfaced end to end.
  const double kp_psi = doc["rows"][0]["kp"].get<double>();
  const double kp_inv = doc["rows"][2]["kp"].get<double>();
  CHECK(std::abs(kp_psi - kp_inv) < 1e-8);

  // Byte-identical on rerun.
  auto out_b = std::filesystem::temp_directory_path() / "weakiv_cli_eis_b";
  std::filesystem::remove_all(out_b);
  run_cli("eis --data " + csv_path.string() + " --schema yogo --normalization both --out " +
          out_b.string());
  CHECK(slurp(out / "eis_report.csv") == slurp(out_b / "eis_report.csv"));
}

TEST_CASE("unknown schema exits with code 2") {
  RunResult r = run_cli("eis --data " + kData + " --schema nope --out /tmp/weakiv_cli_eis_bad");
  CHECK(r.exit_code == 2);
}
