// mvcreg: fit per-component regressions on mixtures with known, varying
// mixing probabilities; inspect weights; simulate data; run Monte Carlo
// studies.

#include <CLI11.hpp>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>

#include "mvcreg/concentrations.hpp"
#include "mvcreg/covariance.hpp"
#include "mvcreg/errors.hpp"
#include "mvcreg/estimator.hpp"
#include "mvcreg/io.hpp"
#include "mvcreg/montecarlo.hpp"
#include "mvcreg/simgen.hpp"

namespace {

using namespace mvcreg;

enum ExitCode : int {
  kOk = 0,
  kMalformed = 2,
  kSingularGramian = 3,
  kSingularNormal = 4,
  kCompareFailed = 5,
  kStudyFailed = 6,
};

constexpr double kCliRowSumTol = 1e-6;

struct Options {
  std::string input;
  std::string output;
  std::string format = "table";
  bool intercept = false;
  double det_tol = kDefaultDetTol;
  double xtx_tol = kDefaultXtxTol;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> reps;
  std::optional<double> rel_tol;
  std::optional<std::size_t> n_obs;
  bool deterministic = false;
};

std::size_t thread_cap() {
  if (const char* env = std::getenv("MVCREG_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v >= 1) return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
    }
    std::cerr << "warning: ignoring invalid MVCREG_THREADS='" << env << "'\n";
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void emit(const Options& opt, const std::string& text) {
  if (opt.output.empty() || opt.output == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(opt.output);
  if (!out) throw InvalidInput("cannot open output file '" + opt.output + "'");
  out << text;
}

std::string dump(const nlohmann::json& j) { return j.dump(2) + "\n"; }

void diagnostic(const std::string& code, const std::string& message) {
  std::cerr << "mvcreg-error[" << code << "]: " << message << '\n';
}

struct LoadedData {
  io::CsvTable table;
  Dataset data;
  ConcentrationMatrix p;
};

LoadedData load(const Options& opt, std::vector<std::string>& warnings) {
  io::CsvTable table = io::read_csv_file(opt.input);
  if (opt.intercept) {
    io::add_intercept(table);
    warnings.push_back("intercept column x0 of ones prepended to the regressors");
  }
  Dataset data(table.y, table.x);
  ConcentrationMatrix p(table.p, kCliRowSumTol);
  return {std::move(table), std::move(data), std::move(p)};
}

int cmd_fit(const Options& opt) {
  std::vector<std::string> warnings;
  const LoadedData in = load(opt, warnings);
  const GramianSummary g = build_gramian(in.p);
  const WeightMatrix a = compute_weights(in.p, g, opt.det_tol);
  FitOptions fo;
  fo.det_tol = opt.det_tol;
  fo.xtx_tol = opt.xtx_tol;
  fo.parallel = !opt.deterministic && thread_cap() > 1;
  FitResult fit = fit_all(in.data, in.p, a, g.det_gamma, fo);

  for (const auto& c : fit.components) {
    if (c.ok && c.negative_eigenvalues > 0) {
      warnings.push_back("component " + std::to_string(c.component + 1) + ": X^T A X has " +
                         std::to_string(c.negative_eigenvalues) +
                         " negative eigenvalue(s) (indefinite)");
    }
  }
  if (fit.all_ok()) {
    try {
      attach_plug_in_covariance(fit, in.data, in.p, a);
      for (std::size_t m = 0; m < fit.plug_in_cov.size(); ++m) {
        const auto& cov = *fit.plug_in_cov[m];
        for (std::size_t i = 0; i < cov.clamped_components.size(); ++i) {
          std::ostringstream os;
          os << "component " << m + 1 << ": residual variance estimate of component "
             << cov.clamped_components[i] + 1 << " was " << cov.clamped_values[i]
             << " and was clamped to 0";
          warnings.push_back(os.str());
        }
      }
    } catch (const SingularD& e) {
      fit.plug_in_cov.assign(fit.components.size(), std::nullopt);
      warnings.push_back(std::string("standard errors unavailable: ") + e.what());
    }
  } else {
    warnings.push_back("standard errors unavailable: not every component could be fitted");
  }

  const auto& names = in.table.x_names;
  if (opt.format == "json") {
    emit(opt, dump(io::fit_to_json(fit, names, warnings)));
  } else if (opt.format == "csv") {
    std::ostringstream os;
    os << "component,regressor,coefficient,se\n";
    os << std::setprecision(17);
    for (std::size_t m = 0; m < fit.components.size(); ++m) {
      const auto& c = fit.components[m];
      if (!c.ok) continue;
      const bool has_cov = fit.plug_in_cov[m].has_value();
      const Eigen::VectorXd se =
          has_cov ? fit.plug_in_cov[m]->standard_errors(fit.n_obs) : Eigen::VectorXd();
      for (Eigen::Index i = 0; i < c.coefficients.size(); ++i) {
        os << m + 1 << ',' << names[static_cast<std::size_t>(i)] << ',' << c.coefficients(i) << ',';
        if (has_cov) os << se(i);
        os << '\n';
      }
    }
    emit(opt, os.str());
  } else {
    emit(opt, io::fit_to_table(fit, names, warnings));
  }

  for (const auto& c : fit.components) {
    if (!c.ok) {
      diagnostic(c.error_code, c.error_message);
    }
  }
  return fit.all_ok() ? kOk : kSingularNormal;
}

int cmd_weights(const Options& opt) {
  std::vector<std::string> warnings;
  const LoadedData in = load(opt, warnings);
  const GramianSummary g = build_gramian(in.p);
  const WeightMatrix a = compute_weights(in.p, g, opt.det_tol);
  const Eigen::MatrixXd check = biorthogonality_matrix(a, in.p);
  if (opt.format == "json") {
    nlohmann::json j;
    j["n_obs"] = in.p.n_obs();
    j["det_gamma"] = g.det_gamma;
    j["gamma"] = io::to_json(g.gamma);
    j["biorthogonality"] = io::to_json(check);
    j["weights"] = io::to_json(a.values);
    emit(opt, dump(j));
  } else if (opt.format == "csv") {
    std::ostringstream os;
    os << std::setprecision(17);
    for (Eigen::Index m = 0; m < a.values.cols(); ++m) os << (m ? "," : "") << 'a' << m + 1;
    os << '\n';
    for (Eigen::Index j = 0; j < a.values.rows(); ++j) {
      for (Eigen::Index m = 0; m < a.values.cols(); ++m) os << (m ? "," : "") << a.values(j, m);
      os << '\n';
    }
    emit(opt, os.str());
  } else {
    std::ostringstream os;
    os << "N = " << in.p.n_obs() << "   det(Gamma_N) = " << std::setprecision(10) << g.det_gamma
       << "\n\nbiorthogonality <a^m p^k>_N (rows m, columns k):\n"
       << std::fixed << std::setprecision(6);
    for (Eigen::Index m = 0; m < check.rows(); ++m) {
      for (Eigen::Index k = 0; k < check.cols(); ++k) os << std::setw(12) << check(m, k);
      os << '\n';
    }
    os << "\nweights:\n";
    for (Eigen::Index m = 0; m < a.values.cols(); ++m)
      os << std::setw(14) << ("a" + std::to_string(m + 1));
    os << '\n';
    for (Eigen::Index j = 0; j < a.values.rows(); ++j) {
      for (Eigen::Index m = 0; m < a.values.cols(); ++m) os << std::setw(14) << a.values(j, m);
      os << '\n';
    }
    emit(opt, os.str());
  }
  return kOk;
}

int cmd_simulate(const Options& opt) {
  SimulationConfig config = io::parse_simulation_config(io::load_json_file(opt.input));
  if (opt.seed) config.seed = *opt.seed;
  if (opt.n_obs) config.n_obs = *opt.n_obs;
  const SimulatedDataset sim = generate(config, opt.deterministic ? 1 : thread_cap());
  std::ostringstream os;
  io::write_csv(os, sim.data, sim.p);
  emit(opt, os.str());
  return kOk;
}

int cmd_study(const Options& opt) {
  io::StudyFile file = io::parse_study_file(io::load_json_file(opt.input));
  if (opt.seed) file.simulation.seed = *opt.seed;
  if (opt.reps) file.study.reps = *opt.reps;
  if (opt.rel_tol) file.rel_tol = *opt.rel_tol;
  file.study.threads = thread_cap();
  file.study.fit.det_tol = opt.det_tol;
  file.study.fit.xtx_tol = opt.xtx_tol;

  const StudyReport report = run_study(file.simulation, file.study);
  std::vector<CompareSummary> comparisons;
  bool pass = true;
  if (file.rel_tol) {
    const std::size_t n_max = *std::max_element(file.study.n_grid.begin(), file.study.n_grid.end());
    for (std::size_t m = 0; m < file.simulation.n_components; ++m) {
      comparisons.push_back(compare_report(report.at(n_max, m), *file.rel_tol, file.mean_abs_tol));
      pass = pass && comparisons.back().pass;
    }
  }
  if (opt.format == "json") {
    emit(opt, dump(io::study_to_json(report, comparisons)));
  } else {
    std::string text = io::study_to_table(report);
    for (const auto& c : comparisons) {
      std::ostringstream os;
      os << "compare N = " << c.n_obs << ", component " << c.component + 1 << ": "
         << (c.pass ? "PASS" : "FAIL") << '\n';
      for (const auto& cell : c.cells) {
        if (!cell.pass) {
          os << "  " << cell.name << " = " << cell.value << " vs " << cell.target << '\n';
        }
      }
      text += os.str();
    }
    emit(opt, text);
  }
  if (!pass) {
    diagnostic("CompareFailed", "Monte Carlo report disagrees with the asymptotic values");
    return kCompareFailed;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Regression on mixtures with varying concentrations"};
  app.require_subcommand(1);
  Options opt;

  auto add_common = [&](CLI::App* sub, bool data_tols) {
    sub->add_option("--input", opt.input, "Input file")->required()->check(CLI::ExistingFile);
    sub->add_option("--output", opt.output, "Output file (default: stdout)");
    sub->add_flag("--deterministic", opt.deterministic,
                  "Sequential execution (results are identical either way)");
    if (data_tols) {
      sub->add_option("--det-tol", opt.det_tol, "Lower bound for det(Gamma_N)");
    }
  };

  auto* fit = app.add_subcommand("fit", "Fit per-component regression coefficients");
  add_common(fit, true);
  fit->add_option("--format", opt.format)->check(CLI::IsMember({"json", "csv", "table"}));
  fit->add_flag("--intercept", opt.intercept, "Prepend a column of ones as x0");
  fit->add_option("--xtx-tol", opt.xtx_tol, "Upper bound for cond(X^T A X)");

  auto* weights = app.add_subcommand("weights", "Print minimax weights and diagnostics");
  add_common(weights, true);
  weights->add_option("--format", opt.format)->check(CLI::IsMember({"json", "csv", "table"}));

  auto* simulate = app.add_subcommand("simulate", "Generate a dataset from a JSON config");
  add_common(simulate, false);
  simulate->add_option("--seed", opt.seed);
  simulate->add_option("--n-obs", opt.n_obs);

  auto* study = app.add_subcommand("study", "Run a Monte Carlo study from a JSON config");
  add_common(study, true);
  study->add_option("--format", opt.format)->check(CLI::IsMember({"json", "table"}));
  study->add_option("--xtx-tol", opt.xtx_tol);
  study->add_option("--seed", opt.seed);
  study->add_option("--reps", opt.reps);
  study->add_option("--rel-tol", opt.rel_tol);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kMalformed;
  }

  try {
    if (*fit) return cmd_fit(opt);
    if (*weights) return cmd_weights(opt);
    if (*simulate) return cmd_simulate(opt);
    return cmd_study(opt);
  } catch (const SingularGramian& e) {
    diagnostic(e.code(), e.what());
    return kSingularGramian;
  } catch (const SingularNormalMatrix& e) {
    diagnostic(e.code(), e.what());
    return kSingularNormal;
  } catch (const StudyFailed& e) {
    diagnostic(e.code(), e.what());
    return kStudyFailed;
  } catch (const Error& e) {
    diagnostic(e.code(), e.what());
    return kMalformed;
  } catch (const std::exception& e) {
    diagnostic("InvalidInput", e.what());
    return kMalformed;
  }
}
