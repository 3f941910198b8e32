#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace weakiv {

// Regression orientation for the consumption Euler equations: the elasticity
// of intertemporal substitution psi is the slope of consumption growth on
// returns, and its reciprocal is the slope of the re-normalized equation.
enum class Normalization {
  PsiOnR,      // dc_{t+1} = mu_c + psi r_{t+1} + u_{t+1}
  InvPsiOnDc,  // r_{t+1} = mu_r + (1/psi) dc_{t+1} + eta_{t+1}
};

enum class PanelSchema { Yogo, Housing };

// Aligned per-country time series: consumption growth, the asset return and
// the instrument matrix (already lagged/aligned to the regression rows).
struct CountryPanel {
  std::string country;
  std::string period_start;
  std::string period_end;
  Eigen::VectorXd dc;
  Eigen::VectorXd r;
  std::vector<std::string> instrument_names;
  Eigen::MatrixXd instruments;

  Eigen::Index length() const { return dc.size(); }
};

void validate(const CountryPanel& panel);

// Loads a single-country CSV in the named schema. The Yogo schema expects
// header columns: date, dc, r, z_nominal_rate, z_inflation, z_dc_lag, z_dp
// (instruments already twice-lagged in the file); unknown columns are
// ignored with a warning on stderr. Rows missing a required value may only
// occur at the ends (they are trimmed); an interior gap raises GapError.
CountryPanel load_panel(const std::string& path, PanelSchema schema);

// Multi-country loader: files carrying a `country` column are split into one
// panel per country (ordered by country code); otherwise the single panel is
// named after the file stem.
std::vector<CountryPanel> load_panels(const std::string& path, PanelSchema schema);

struct NamedSeries {
  std::string name;
  Eigen::VectorXd values;
};

// Lagged instrument block: column k at row t equals indicator k at t - lags,
// with the first `lags` rows dropped across the whole output.
struct LaggedInstruments {
  std::vector<std::string> names;
  Eigen::MatrixXd values;  // (T - lags) x k
};
LaggedInstruments build_lagged_instruments(const std::vector<NamedSeries>& series, int lags);

// Leave-one-out mean of the other countries' return series (aligned lengths
// required).
Eigen::VectorXd build_loo_mean_instrument(const std::vector<NamedSeries>& returns_by_country,
                                          const std::string& target);

// One row of the replication table: estimates and statistics for a country
// under one normalization, using Newey-West meat with hac_lags everywhere
// (F_eff, J and KP alike) and an intercept partialled out.
struct EISRow {
  std::string country;
  Normalization normalization = Normalization::PsiOnR;
  double f_eff = 0.0;
  double kappa = 0.0;
  double beta_2sls = 0.0;
  double beta_liml = 0.0;
  double j_stat = 0.0;
  double kp_stat = 0.0;
};
EISRow run_eis_row(const CountryPanel& panel, Normalization normalization, int hac_lags);

// Housing pipeline: reads the long-format housing CSV (year, country, dc, r),
// builds per-country panels with instruments (r lagged own_lag times, and the
// contemporaneous leave-one-out mean of foreign returns), aligned across
// countries.
std::vector<CountryPanel> build_housing_panels(const std::string& path, int own_lag);

}  // namespace weakiv
