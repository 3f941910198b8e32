#include "weakiv/empirics.hpp"

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>

#include "weakiv/covariance.hpp"
#include "weakiv/csv.hpp"
#include "weakiv/dataset.hpp"
#include "weakiv/errors.hpp"
#include "weakiv/estimators.hpp"
#include "weakiv/inference.hpp"

namespace weakiv {

namespace {

struct SchemaSpec {
  std::string label_column;  // date or year
  std::vector<std::string> value_columns;
};

SchemaSpec schema_spec(PanelSchema schema) {
  switch (schema) {
    case PanelSchema::Yogo:
      return {"date", {"dc", "r", "z_nominal_rate", "z_inflation", "z_dc_lag", "z_dp"}};
    case PanelSchema::Housing:
      return {"year", {"dc", "r"}};
  }
  throw SchemaError("unknown schema");
}

// Rows with missing required values may appear only as a prefix or suffix;
// returns the [first, last] complete-row range.
std::pair<std::size_t, std::size_t> complete_range(const CsvTable& table,
                                                   const std::vector<std::size_t>& required) {
  auto row_complete = [&](std::size_t i) {
    for (std::size_t j : required)
      if (csv_cell_missing(table.rows[i][j])) return false;
    return true;
  };
  std::size_t first = 0;
  while (first < table.rows.size() && !row_complete(first)) ++first;
  if (first == table.rows.size()) throw ParseError("no complete data rows");
  std::size_t last = table.rows.size() - 1;
  while (!row_complete(last)) --last;
  for (std::size_t i = first; i <= last; ++i)
    if (!row_complete(i)) throw GapError("interior missing value at data row " + std::to_string(i + 2));
  return {first, last};
}

CountryPanel panel_from_rows(const CsvTable& table, const std::vector<std::size_t>& row_ids,
                             const SchemaSpec& spec, const std::string& country) {
  auto label_idx = table.column_index(spec.label_column);
  if (!label_idx) throw SchemaError("missing required column '" + spec.label_column + "'");
  std::vector<std::size_t> value_idx;
  for (const std::string& name : spec.value_columns) {
    auto idx = table.column_index(name);
    if (!idx) throw SchemaError("missing required column '" + name + "'");
    value_idx.push_back(*idx);
  }

  CsvTable sub;
  sub.columns = table.columns;
  for (std::size_t i : row_ids) sub.rows.push_back(table.rows[i]);
  std::vector<std::size_t> required = value_idx;
  auto [first, last] = complete_range(sub, required);

  const std::size_t T = last - first + 1;
  CountryPanel panel;
  panel.country = country;
  panel.period_start = sub.rows[first][*label_idx];
  panel.period_end = sub.rows[last][*label_idx];
  panel.dc.resize(static_cast<Eigen::Index>(T));
  panel.r.resize(static_cast<Eigen::Index>(T));
  const std::size_t n_instr = spec.value_columns.size() - 2;
  panel.instruments.resize(static_cast<Eigen::Index>(T), static_cast<Eigen::Index>(n_instr));
  for (std::size_t k = 0; k < n_instr; ++k) panel.instrument_names.push_back(spec.value_columns[k + 2]);

  for (std::size_t t = 0; t < T; ++t) {
    const auto& row = sub.rows[first + t];
    const std::string ctx = country + " row " + std::to_string(first + t + 2);
    panel.dc(static_cast<Eigen::Index>(t)) = csv_parse_double(row[value_idx[0]], ctx);
    panel.r(static_cast<Eigen::Index>(t)) = csv_parse_double(row[value_idx[1]], ctx);
    for (std::size_t k = 0; k < n_instr; ++k)
      panel.instruments(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(k)) =
          csv_parse_double(row[value_idx[k + 2]], ctx);
  }
  return panel;
}

void warn_unknown_columns(const CsvTable& table, const SchemaSpec& spec) {
  for (const std::string& col : table.columns) {
    if (col == spec.label_column || col == "country") continue;
    if (std::find(spec.value_columns.begin(), spec.value_columns.end(), col) ==
        spec.value_columns.end())
      std::cerr << "warning: ignoring unknown column '" << col << "'\n";
  }
}

}  // namespace

void validate(const CountryPanel& panel) {
  const auto T = panel.length();
  if (panel.r.size() != T || panel.instruments.rows() != T)
    throw DimensionError("panel series lengths differ");
  if (panel.instruments.cols() < 2) throw DimensionError("need at least two instruments");
  if (!panel.dc.allFinite() || !panel.r.allFinite() || !panel.instruments.allFinite())
    throw NonFiniteError("panel contains non-finite values");
}

std::vector<CountryPanel> load_panels(const std::string& path, PanelSchema schema) {
  CsvTable table = read_csv(path);
  SchemaSpec spec = schema_spec(schema);
  warn_unknown_columns(table, spec);

  std::vector<CountryPanel> panels;
  auto country_idx = table.column_index("country");
  if (country_idx) {
    std::map<std::string, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < table.rows.size(); ++i)
      groups[table.rows[i][*country_idx]].push_back(i);
    for (const auto& [code, rows] : groups)
      panels.push_back(panel_from_rows(table, rows, spec, code));
  } else {
    std::vector<std::size_t> all(table.rows.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    panels.push_back(panel_from_rows(table, all, spec,
                                     std::filesystem::path(path).stem().string()));
  }
  // Housing-schema panels carry no instrument columns at load time; the
  // pipeline attaches them afterwards.
  for (const CountryPanel& p : panels)
    if (p.instruments.cols() > 0) validate(p);
  return panels;
}

CountryPanel load_panel(const std::string& path, PanelSchema schema) {
  std::vector<CountryPanel> panels = load_panels(path, schema);
  if (panels.size() != 1)
    throw SchemaError("expected a single-country file, found " + std::to_string(panels.size()) +
                      " countries");
  return panels.front();
}

LaggedInstruments build_lagged_instruments(const std::vector<NamedSeries>& series, int lags) {
  if (series.empty()) throw DimensionError("no series supplied");
  if (lags < 1) throw DimensionError("lags must be at least 1");
  const Eigen::Index T = series.front().values.size();
  for (const NamedSeries& s : series)
    if (s.values.size() != T) throw DimensionError("series lengths differ");
  if (lags >= T) throw DimensionError("lags must be smaller than the series length");

  LaggedInstruments out;
  out.values.resize(T - lags, static_cast<Eigen::Index>(series.size()));
  for (std::size_t k = 0; k < series.size(); ++k) {
    out.names.push_back(series[k].name + "_lag" + std::to_string(lags));
    out.values.col(static_cast<Eigen::Index>(k)) = series[k].values.head(T - lags);
  }
  return out;
}

Eigen::VectorXd build_loo_mean_instrument(const std::vector<NamedSeries>& returns_by_country,
                                          const std::string& target) {
  if (returns_by_country.size() < 2) throw DimensionError("need at least two countries");
  const Eigen::Index T = returns_by_country.front().values.size();
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(T);
  int used = 0;
  bool found_target = false;
  for (const NamedSeries& s : returns_by_country) {
    if (s.values.size() != T) throw DimensionError("country series lengths differ");
    if (s.name == target) {
      found_target = true;
      continue;
    }
    sum += s.values;
    ++used;
  }
  if (!found_target) throw DimensionError("target country not present");
  if (used == 0) throw DimensionError("no other countries to average");
  return sum / static_cast<double>(used);
}

EISRow run_eis_row(const CountryPanel& panel, Normalization normalization, int hac_lags) {
  validate(panel);
  if (hac_lags < 0) throw ConfigError("hac_lags must be nonnegative");

  IVDataset d;
  if (normalization == Normalization::PsiOnR) {
    d.y = panel.dc;
    d.X = panel.r;
  } else {
    d.y = panel.r;
    d.X = panel.dc;
  }
  d.Z = panel.instruments;
  d.X_exog = Eigen::MatrixXd::Ones(panel.length(), 1);
  IVDataset dd = partial_out(d);

  const CovarianceSpec nw = CovarianceSpec::newey_west(hac_lags);
  EstimationResult two_sls = estimate_2sls(dd);
  EstimationResult liml = estimate_liml(dd);
  TestResult j = hansen_j(dd, nw);
  TestResult kp = robust_score(dd, liml, nw);
  EffectiveFResult feff = effective_f(dd, nw);

  EISRow row;
  row.country = panel.country;
  row.normalization = normalization;
  row.f_eff = feff.result.statistic;
  row.kappa = feff.kappa;
  row.beta_2sls = two_sls.beta_hat(0);
  row.beta_liml = liml.beta_hat(0);
  row.j_stat = j.statistic;
  row.kp_stat = kp.statistic;
  return row;
}

std::vector<CountryPanel> build_housing_panels(const std::string& path, int own_lag) {
  if (own_lag < 1 || own_lag > 2) throw ConfigError("own_lag must be 1 or 2");
  std::vector<CountryPanel> raw = load_panels(path, PanelSchema::Housing);
  if (raw.size() < 2) throw DimensionError("housing pipeline needs at least two countries");

  const Eigen::Index T = raw.front().length();
  for (const CountryPanel& p : raw)
    if (p.length() != T || p.period_start != raw.front().period_start ||
        p.period_end != raw.front().period_end)
      throw DimensionError("housing panels must share an aligned period grid");

  std::vector<NamedSeries> returns;
  for (const CountryPanel& p : raw) returns.push_back({p.country, p.r});

  // Instruments for outcome rows [own_lag, T): own return lagged own_lag
  // times and the contemporaneous leave-one-out foreign mean.
  std::vector<CountryPanel> out;
  for (const CountryPanel& p : raw) {
    Eigen::VectorXd loo = build_loo_mean_instrument(returns, p.country);
    CountryPanel q;
    q.country = p.country;
    q.period_start = p.period_start;  // labels keep the raw span
    q.period_end = p.period_end;
    const Eigen::Index n = T - own_lag;
    q.dc = p.dc.tail(n);
    q.r = p.r.tail(n);
    q.instruments.resize(n, 2);
    q.instruments.col(0) = p.r.head(n);  // r lagged own_lag
    q.instruments.col(1) = loo.tail(n);
    q.instrument_names = {"r_own_lag" + std::to_string(own_lag), "r_foreign_mean"};
    validate(q);
    out.push_back(std::move(q));
  }
  std::sort(out.begin(), out.end(),
            [](const CountryPanel& a, const CountryPanel& b) { return a.country < b.country; });
  return out;
}

}  // namespace weakiv
