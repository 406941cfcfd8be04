#include "mvcreg/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "mvcreg/errors.hpp"

namespace mvcreg::io {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

bool indexed_name(const std::string& name, char prefix) {
  if (name.size() < 2 || name[0] != prefix) return false;
  for (std::size_t i = 1; i < name.size(); ++i) {
    if (name[i] < '0' || name[i] > '9') return false;
  }
  return true;
}

double parse_number(const std::string& cell, std::size_t line) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(cell, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != cell.size()) {
    throw InvalidInput("line " + std::to_string(line) + ": cannot parse number '" + cell + "'");
  }
  return v;
}

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fixed4(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

template <typename T>
T required(const nlohmann::json& j, const std::string& key, const std::string& path) {
  if (!j.contains(key)) throw ConfigError(path + key, "is required");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path + key, std::string("has the wrong type: ") + e.what());
  }
}

template <typename T>
T optional_value(const nlohmann::json& j, const std::string& key, const std::string& path,
                 T fallback) {
  if (!j.contains(key)) return fallback;
  return required<T>(j, key, path);
}

RegressorSpec parse_regressor(const nlohmann::json& j, const std::string& path) {
  if (!j.is_object()) throw ConfigError(path, "must be an object");
  const auto type = required<std::string>(j, "type", path + ".");
  if (type == "constant") {
    return RegressorSpec::constant(optional_value<double>(j, "value", path + ".", 1.0));
  }
  if (type == "gaussian") {
    const double mean = required<double>(j, "mean", path + ".");
    const bool has_sd = j.contains("sd");
    const bool has_var = j.contains("variance");
    if (has_sd == has_var) throw ConfigError(path + ".sd", "give exactly one of sd, variance");
    double sd = has_sd ? required<double>(j, "sd", path + ".")
                       : required<double>(j, "variance", path + ".");
    if (has_var) {
      if (!(sd > 0.0)) throw ConfigError(path + ".variance", "must be positive");
      sd = std::sqrt(sd);
    }
    return RegressorSpec::gaussian(mean, sd);
  }
  throw ConfigError(path + ".type", "unknown regressor type '" + type + "'");
}

}  // namespace

CsvTable read_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(in, line) && trim(line).empty()) ++line_no;
  if (trim(line).empty()) throw InvalidInput("CSV input is empty; a header row is required");
  const std::vector<std::string> header = split(line);

  std::optional<std::size_t> y_col;
  std::vector<std::size_t> x_cols, p_cols;
  CsvTable table;
  for (std::size_t c = 0; c < header.size(); ++c) {
    const std::string& h = header[c];
    if (h == "y") {
      if (y_col) throw InvalidInput("header has more than one 'y' column");
      y_col = c;
    } else if (indexed_name(h, 'x')) {
      x_cols.push_back(c);
      table.x_names.push_back(h);
    } else if (indexed_name(h, 'p')) {
      p_cols.push_back(c);
    } else {
      throw InvalidInput("unknown CSV column '" + h + "'; expected y, x1..xd, p1..pM");
    }
  }
  if (!y_col) throw InvalidInput("header has no 'y' column");
  if (x_cols.empty()) throw InvalidInput("header has no regressor columns x1..xd");
  if (p_cols.empty()) throw InvalidInput("header has no concentration columns p1..pM");

  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split(line);
    if (cells.size() != header.size()) {
      throw InvalidInput("line " + std::to_string(line_no) + " has " +
                         std::to_string(cells.size()) + " fields, header has " +
                         std::to_string(header.size()));
    }
    std::vector<double> row(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) row[c] = parse_number(cells[c], line_no);
    rows.push_back(std::move(row));
  }
  const auto n = static_cast<Eigen::Index>(rows.size());
  table.y.resize(n);
  table.x.resize(n, static_cast<Eigen::Index>(x_cols.size()));
  table.p.resize(n, static_cast<Eigen::Index>(p_cols.size()));
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto& r = rows[static_cast<std::size_t>(j)];
    table.y(j) = r[*y_col];
    for (std::size_t i = 0; i < x_cols.size(); ++i) {
      table.x(j, static_cast<Eigen::Index>(i)) = r[x_cols[i]];
    }
    for (std::size_t k = 0; k < p_cols.size(); ++k) {
      table.p(j, static_cast<Eigen::Index>(k)) = r[p_cols[k]];
    }
  }
  return table;
}

CsvTable read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open input file '" + path + "'");
  return read_csv(in);
}

void write_csv(std::ostream& out, const Dataset& data, const ConcentrationMatrix& p) {
  out << "y";
  for (std::size_t i = 1; i <= data.n_regressors(); ++i) out << ",x" << i;
  for (std::size_t k = 1; k <= p.n_components(); ++k) out << ",p" << k;
  out << '\n';
  for (Eigen::Index j = 0; j < data.x().rows(); ++j) {
    out << g17(data.y()(j));
    for (Eigen::Index i = 0; i < data.x().cols(); ++i) out << ',' << g17(data.x()(j, i));
    for (Eigen::Index k = 0; k < p.values().cols(); ++k) out << ',' << g17(p.values()(j, k));
    out << '\n';
  }
}

void add_intercept(CsvTable& table) {
  Eigen::MatrixXd x(table.x.rows(), table.x.cols() + 1);
  x.col(0).setOnes();
  x.rightCols(table.x.cols()) = table.x;
  table.x = std::move(x);
  table.x_names.insert(table.x_names.begin(), "x0");
}

SimulationConfig parse_simulation_config(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("$", "config must be a JSON object");
  SimulationConfig c;
  c.n_obs = required<std::size_t>(j, "n_obs", "");
  c.n_components = required<std::size_t>(j, "n_components", "");
  c.seed = optional_value<std::uint64_t>(j, "seed", "", 0);

  const auto conc = j.contains("concentrations") ? j.at("concentrations")
                                                 : nlohmann::json{{"model", "linear_ramp"}};
  const auto model = required<std::string>(conc, "model", "concentrations.");
  if (model == "linear_ramp") {
    c.concentration_model = ConcentrationModel::linear_ramp;
  } else if (model == "explicit") {
    c.concentration_model = ConcentrationModel::explicit_matrix;
    const auto rows = required<std::vector<std::vector<double>>>(conc, "matrix", "concentrations.");
    Eigen::MatrixXd mat(static_cast<Eigen::Index>(rows.size()),
                        rows.empty() ? 0 : static_cast<Eigen::Index>(rows[0].size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (rows[r].size() != static_cast<std::size_t>(mat.cols())) {
        throw ConfigError("concentrations.matrix[" + std::to_string(r) + "]", "ragged row");
      }
      for (std::size_t k = 0; k < rows[r].size(); ++k) {
        mat(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) = rows[r][k];
      }
    }
    c.explicit_concentrations = std::move(mat);
  } else {
    throw ConfigError("concentrations.model", "unknown model '" + model + "'");
  }

  if (!j.contains("components") || !j.at("components").is_array()) {
    throw ConfigError("components", "is required and must be an array");
  }
  const auto& comps = j.at("components");
  for (std::size_t k = 0; k < comps.size(); ++k) {
    const std::string path = "components[" + std::to_string(k) + "]";
    const auto& cj = comps[k];
    if (!cj.is_object()) throw ConfigError(path, "must be an object");
    ComponentSpec spec;
    if (!cj.contains("regressors") || !cj.at("regressors").is_array()) {
      throw ConfigError(path + ".regressors", "is required and must be an array");
    }
    const auto& regs = cj.at("regressors");
    for (std::size_t i = 0; i < regs.size(); ++i) {
      spec.regressors.push_back(
          parse_regressor(regs[i], path + ".regressors[" + std::to_string(i) + "]"));
    }
    spec.error_sd = required<double>(cj, "error_sd", path + ".");
    const auto b = required<std::vector<double>>(cj, "true_b", path + ".");
    spec.true_b = Eigen::Map<const Eigen::VectorXd>(b.data(), static_cast<Eigen::Index>(b.size()));
    c.components.push_back(std::move(spec));
  }
  c.validate();
  return c;
}

StudyFile parse_study_file(const nlohmann::json& j) {
  StudyFile f;
  f.simulation = parse_simulation_config(j);
  if (j.contains("study")) {
    const auto& s = j.at("study");
    if (!s.is_object()) throw ConfigError("study", "must be an object");
    f.study.reps = optional_value<std::size_t>(s, "reps", "study.", f.study.reps);
    f.study.n_grid =
        optional_value<std::vector<std::size_t>>(s, "n_grid", "study.", f.study.n_grid);
    if (s.contains("rel_tol")) f.rel_tol = required<double>(s, "rel_tol", "study.");
    f.mean_abs_tol = optional_value<double>(s, "mean_abs_tol", "study.", f.mean_abs_tol);
  }
  if (f.study.reps < 2) throw ConfigError("study.reps", "must be at least 2");
  if (f.study.n_grid.empty()) throw ConfigError("study.n_grid", "must not be empty");
  for (std::size_t i = 0; i < f.study.n_grid.size(); ++i) {
    if (f.study.n_grid[i] <= f.simulation.n_regressors()) {
      throw ConfigError("study.n_grid[" + std::to_string(i) + "]",
                        "must exceed the number of regressors");
    }
  }
  return f;
}

nlohmann::json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, "cannot open config file");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path, std::string("invalid JSON: ") + e.what());
  }
}

nlohmann::json to_json(const Eigen::MatrixXd& m) {
  nlohmann::json out = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    out.push_back(std::move(row));
  }
  return out;
}

nlohmann::json to_json(const Eigen::VectorXd& v) {
  nlohmann::json out = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

nlohmann::json fit_to_json(const FitResult& fit, const std::vector<std::string>& x_names,
                           const std::vector<std::string>& warnings) {
  nlohmann::json j;
  j["n_obs"] = fit.n_obs;
  j["det_gamma"] = fit.det_gamma;
  j["regressors"] = x_names;
  j["components"] = nlohmann::json::array();
  for (std::size_t m = 0; m < fit.components.size(); ++m) {
    const auto& c = fit.components[m];
    nlohmann::json cj;
    cj["component"] = m + 1;
    cj["ok"] = c.ok;
    cj["xtx_condition"] = c.xtx_condition;
    if (c.ok) {
      cj["coefficients"] = to_json(c.coefficients);
      cj["negative_eigenvalues"] = c.negative_eigenvalues;
    } else {
      cj["error"] = {{"code", c.error_code}, {"message", c.error_message}};
    }
    if (m < fit.plug_in_cov.size() && fit.plug_in_cov[m]) {
      const auto& cov = *fit.plug_in_cov[m];
      cj["standard_errors"] = to_json(cov.standard_errors(fit.n_obs));
      cj["asymptotic_v"] = to_json(cov.v);
    }
    j["components"].push_back(std::move(cj));
  }
  j["warnings"] = warnings;
  return j;
}

std::string fit_to_table(const FitResult& fit, const std::vector<std::string>& x_names,
                         const std::vector<std::string>& warnings) {
  std::ostringstream os;
  os << "N = " << fit.n_obs << "   det(Gamma_N) = " << std::setprecision(6) << fit.det_gamma
     << '\n';
  for (std::size_t m = 0; m < fit.components.size(); ++m) {
    const auto& c = fit.components[m];
    os << "component " << m + 1 << "  cond(X^T A X) = " << std::setprecision(4) << c.xtx_condition
       << '\n';
    if (!c.ok) {
      os << "  error " << c.error_code << ": " << c.error_message << '\n';
      continue;
    }
    const bool has_cov = m < fit.plug_in_cov.size() && fit.plug_in_cov[m].has_value();
    const Eigen::VectorXd se =
        has_cov ? fit.plug_in_cov[m]->standard_errors(fit.n_obs) : Eigen::VectorXd();
    for (Eigen::Index i = 0; i < c.coefficients.size(); ++i) {
      os << "  " << std::left << std::setw(6) << x_names[static_cast<std::size_t>(i)] << std::right
         << std::setw(14) << fixed4(c.coefficients(i));
      if (has_cov) os << "   se " << std::setw(10) << fixed4(se(i));
      os << '\n';
    }
  }
  for (const auto& w : warnings) os << "warning: " << w << '\n';
  return os.str();
}

nlohmann::json study_to_json(const StudyReport& report,
                             const std::vector<CompareSummary>& comparisons) {
  nlohmann::json j;
  j["seed"] = report.seed;
  j["reps"] = report.rep_count;
  j["n_grid"] = report.n_grid;
  j["analytic_v"] = nlohmann::json::array();
  for (const auto& v : report.analytic_v) j["analytic_v"].push_back(to_json(v));
  j["reports"] = nlohmann::json::array();
  for (const auto& r : report.reports) {
    j["reports"].push_back({{"component", r.component + 1},
                            {"n_obs", r.n_obs},
                            {"rep_count", r.rep_count},
                            {"failures", r.failures},
                            {"mean_b", to_json(r.mean_b)},
                            {"true_b", to_json(r.true_b)},
                            {"scaled_cov", to_json(r.scaled_cov)}});
  }
  j["comparisons"] = nlohmann::json::array();
  for (const auto& c : comparisons) {
    nlohmann::json cells = nlohmann::json::array();
    for (const auto& cell : c.cells) {
      cells.push_back({{"name", cell.name},
                       {"value", cell.value},
                       {"target", cell.target},
                       {"pass", cell.pass}});
    }
    j["comparisons"].push_back({{"component", c.component + 1},
                                {"n_obs", c.n_obs},
                                {"pass", c.pass},
                                {"cells", std::move(cells)}});
  }
  return j;
}

std::string study_to_table(const StudyReport& report) {
  std::ostringstream os;
  const std::size_t mc = report.analytic_v.size();
  for (std::size_t m = 0; m < mc; ++m) {
    const auto d = report.analytic_v[m].rows();
    os << "Component " << m + 1 << '\n';
    os << std::left << std::setw(8) << "n" << std::right;
    for (Eigen::Index i = 0; i < d; ++i) os << std::setw(12) << ("M b" + std::to_string(i));
    for (Eigen::Index i = 0; i < d; ++i) os << std::setw(12) << ("N*D b" + std::to_string(i));
    for (Eigen::Index i = 0; i < d; ++i) {
      for (Eigen::Index k = i + 1; k < d; ++k) {
        os << std::setw(14) << ("N*cov(b" + std::to_string(i) + ",b" + std::to_string(k) + ")");
      }
    }
    os << '\n';
    auto row = [&](const std::string& label, const Eigen::VectorXd& mean,
                   const Eigen::MatrixXd& cov) {
      os << std::left << std::setw(8) << label << std::right;
      for (Eigen::Index i = 0; i < d; ++i) os << std::setw(12) << fixed4(mean(i));
      for (Eigen::Index i = 0; i < d; ++i) os << std::setw(12) << fixed4(cov(i, i));
      for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index k = i + 1; k < d; ++k) os << std::setw(14) << fixed4(cov(i, k));
      }
      os << '\n';
    };
    const MonteCarloReport* any = nullptr;
    for (const auto& r : report.reports) {
      if (r.component != m) continue;
      row(std::to_string(r.n_obs), r.mean_b, r.scaled_cov);
      any = &r;
    }
    if (any) row("inf", any->true_b, report.analytic_v[m]);
    os << '\n';
  }
  return os.str();
}

}  // namespace mvcreg::io
