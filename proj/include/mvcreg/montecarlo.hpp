#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "mvcreg/estimator.hpp"
#include "mvcreg/simgen.hpp"

namespace mvcreg {

struct StudyOptions {
  std::size_t reps = 2000;
  std::vector<std::size_t> n_grid{500, 1000, 2000, 5000};
  std::size_t threads = 1;
  FitOptions fit;
};

// Raw estimates of one grid point: estimates[r] is the M x d coefficient
// matrix of replication r, ok[r][m] whether component m fitted.
struct ReplicationSet {
  std::size_t n_obs = 0;
  std::vector<Eigen::MatrixXd> estimates;
  std::vector<std::vector<bool>> ok;
};

struct MonteCarloReport {
  std::size_t component = 0;
  std::size_t n_obs = 0;
  std::uint64_t seed = 0;
  std::size_t rep_count = 0;
  std::size_t failures = 0;
  Eigen::VectorXd mean_b;
  Eigen::MatrixXd scaled_cov;  // N * sample covariance (1/(R-1))
  Eigen::MatrixXd analytic_v;
  Eigen::VectorXd true_b;
};

struct StudyReport {
  std::uint64_t seed = 0;
  std::size_t rep_count = 0;
  std::vector<std::size_t> n_grid;
  // Ordered by grid point, then component.
  std::vector<MonteCarloReport> reports;
  std::vector<Eigen::MatrixXd> analytic_v;  // per component

  const MonteCarloReport& at(std::size_t n_obs, std::size_t component) const;
};

// Seed of replication `rep` at sample size `n_obs`.
std::uint64_t replication_seed(std::uint64_t base_seed, std::size_t n_obs, std::size_t rep);

// Runs `reps` generate -> fit cycles at sample size `n_obs`. Replications
// run on `threads` workers; results are stored by replication index.
ReplicationSet run_replications(const SimulationConfig& config, std::size_t n_obs, std::size_t reps,
                                std::size_t threads = 1, const FitOptions& fit = {});

MonteCarloReport summarize(const ReplicationSet& set, const SimulationConfig& config,
                           std::size_t component, const Eigen::MatrixXd& analytic_v);

// Analytic V of every component from the configured distributions.
std::vector<Eigen::MatrixXd> analytic_covariances(const SimulationConfig& config);

// Throws StudyFailed when more than half of the replications of some grid
// point fail for some component.
StudyReport run_study(const SimulationConfig& config, const StudyOptions& options);

struct CompareCell {
  std::string name;
  double value = 0.0;
  double target = 0.0;
  bool pass = false;
};

struct CompareSummary {
  std::size_t component = 0;
  std::size_t n_obs = 0;
  std::vector<CompareCell> cells;
  bool pass = true;
};

inline constexpr double kDefaultMeanAbsTol = 0.02;

// Covariance cells pass when |scaled - analytic| <= rel_tol * |analytic|;
// mean cells when |mean_b - true_b| <= mean_abs_tol.
CompareSummary compare_report(const MonteCarloReport& report, double rel_tol,
                              double mean_abs_tol = kDefaultMeanAbsTol);

}  // namespace mvcreg
