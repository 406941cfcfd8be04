#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "mvcreg/estimator.hpp"
#include "mvcreg/montecarlo.hpp"
#include "mvcreg/simgen.hpp"

namespace mvcreg::io {

// Columns of a `y, x1..xd, p1..pM` CSV file, in header order.
struct CsvTable {
  Eigen::VectorXd y;
  Eigen::MatrixXd x;
  Eigen::MatrixXd p;
  std::vector<std::string> x_names;
};

// Throws InvalidInput on a missing header, unknown column names, ragged
// rows or unparsable numbers.
CsvTable read_csv(std::istream& in);
CsvTable read_csv_file(const std::string& path);

// Values written with 17 significant digits, so reading back is exact.
void write_csv(std::ostream& out, const Dataset& data, const ConcentrationMatrix& p);

// Prepends a column of ones named x0.
void add_intercept(CsvTable& table);

struct StudyFile {
  SimulationConfig simulation;
  StudyOptions study;
  std::optional<double> rel_tol;  // comparison enforced only when set
  double mean_abs_tol = kDefaultMeanAbsTol;
};

// Throws ConfigError naming the JSON path of the first bad field.
SimulationConfig parse_simulation_config(const nlohmann::json& j);
StudyFile parse_study_file(const nlohmann::json& j);
nlohmann::json load_json_file(const std::string& path);

nlohmann::json to_json(const Eigen::MatrixXd& m);
nlohmann::json to_json(const Eigen::VectorXd& v);

nlohmann::json fit_to_json(const FitResult& fit, const std::vector<std::string>& x_names,
                           const std::vector<std::string>& warnings);
std::string fit_to_table(const FitResult& fit, const std::vector<std::string>& x_names,
                         const std::vector<std::string>& warnings);

nlohmann::json study_to_json(const StudyReport& report,
                             const std::vector<CompareSummary>& comparisons);
// One block per component: a row per grid point plus the analytic row,
// values rounded to 4 decimals.
std::string study_to_table(const StudyReport& report);

}  // namespace mvcreg::io
