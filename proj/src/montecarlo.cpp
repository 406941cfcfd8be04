#include "mvcreg/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include "mvcreg/covariance.hpp"
#include "mvcreg/errors.hpp"
#include "mvcreg/rng.hpp"

namespace mvcreg {

const MonteCarloReport& StudyReport::at(std::size_t n_obs, std::size_t component) const {
  for (const auto& r : reports) {
    if (r.n_obs == n_obs && r.component == component) return r;
  }
  throw InvalidInput("no report for N = " + std::to_string(n_obs) + ", component " +
                     std::to_string(component + 1));
}

std::uint64_t replication_seed(std::uint64_t base_seed, std::size_t n_obs, std::size_t rep) {
  return derive_seed(derive_seed(base_seed, n_obs), rep);
}

ReplicationSet run_replications(const SimulationConfig& config, std::size_t n_obs, std::size_t reps,
                                std::size_t threads, const FitOptions& fit) {
  SimulationConfig base = config;
  base.n_obs = n_obs;
  base.validate();
  const ConcentrationMatrix p = base.concentrations();
  const GramianSummary g = build_gramian(p);
  const WeightMatrix a = compute_weights(p, g, fit.det_tol);

  ReplicationSet set;
  set.n_obs = n_obs;
  set.estimates.resize(reps);
  set.ok.resize(reps);

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    FitOptions local = fit;
    local.parallel = false;
    try {
      for (std::size_t r = next++; r < reps; r = next++) {
        SimulationConfig rc = base;
        rc.seed = replication_seed(config.seed, n_obs, r);
        const SimulatedDataset sim = generate(rc);
        const FitResult res = fit_all(sim.data, p, a, g.det_gamma, local);
        set.estimates[r] = res.coefficients;
        set.ok[r].resize(res.components.size());
        for (std::size_t m = 0; m < res.components.size(); ++m) set.ok[r][m] = res.components[m].ok;
      }
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
      next = reps;
    }
  };
  threads = std::max<std::size_t>(1, std::min(threads, reps));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  return set;
}

MonteCarloReport summarize(const ReplicationSet& set, const SimulationConfig& config,
                           std::size_t component, const Eigen::MatrixXd& analytic_v) {
  const auto m = static_cast<Eigen::Index>(component);
  const Eigen::Index d = static_cast<Eigen::Index>(config.n_regressors());
  MonteCarloReport rep;
  rep.component = component;
  rep.n_obs = set.n_obs;
  rep.seed = config.seed;
  rep.rep_count = set.estimates.size();
  rep.analytic_v = analytic_v;
  rep.true_b = config.components[component].true_b;
  rep.mean_b = Eigen::VectorXd::Zero(d);
  rep.scaled_cov = Eigen::MatrixXd::Zero(d, d);

  std::size_t n_ok = 0;
  for (std::size_t r = 0; r < set.estimates.size(); ++r) {
    if (!set.ok[r][component]) continue;
    rep.mean_b += set.estimates[r].row(m).transpose();
    ++n_ok;
  }
  rep.failures = rep.rep_count - n_ok;
  if (n_ok == 0) {
    rep.mean_b.setConstant(std::numeric_limits<double>::quiet_NaN());
    rep.scaled_cov.setConstant(std::numeric_limits<double>::quiet_NaN());
    return rep;
  }
  rep.mean_b /= static_cast<double>(n_ok);
  for (std::size_t r = 0; r < set.estimates.size(); ++r) {
    if (!set.ok[r][component]) continue;
    const Eigen::VectorXd dev = set.estimates[r].row(m).transpose() - rep.mean_b;
    rep.scaled_cov += dev * dev.transpose();
  }
  if (n_ok > 1) {
    rep.scaled_cov *= static_cast<double>(set.n_obs) / static_cast<double>(n_ok - 1);
  } else {
    rep.scaled_cov.setConstant(std::numeric_limits<double>::quiet_NaN());
  }
  return rep;
}

std::vector<Eigen::MatrixXd> analytic_covariances(const SimulationConfig& config) {
  config.validate();
  std::vector<ComponentMoments> moments;
  for (const auto& c : config.components) moments.push_back(analytic_component_moments(c));
  std::vector<Eigen::MatrixXd> out;
  for (std::size_t m = 0; m < config.n_components; ++m) {
    out.push_back(analytic_sigma(moments, limiting_co_moments(config, m), m).v);
  }
  return out;
}

StudyReport run_study(const SimulationConfig& config, const StudyOptions& options) {
  if (options.reps < 2) throw ConfigError("study.reps", "must be at least 2");
  if (options.n_grid.empty()) throw ConfigError("study.n_grid", "must not be empty");
  if (config.concentration_model == ConcentrationModel::explicit_matrix) {
    for (std::size_t i = 0; i < options.n_grid.size(); ++i) {
      if (options.n_grid[i] != config.n_obs) {
        throw ConfigError("study.n_grid[" + std::to_string(i) + "]",
                          "explicit concentrations fix N = " + std::to_string(config.n_obs));
      }
    }
  }
  config.validate();

  StudyReport out;
  out.seed = config.seed;
  out.rep_count = options.reps;
  out.n_grid = options.n_grid;
  out.analytic_v = analytic_covariances(config);
  for (std::size_t n : options.n_grid) {
    const ReplicationSet set =
        run_replications(config, n, options.reps, options.threads, options.fit);
    for (std::size_t m = 0; m < config.n_components; ++m) {
      MonteCarloReport rep = summarize(set, config, m, out.analytic_v[m]);
      if (2 * rep.failures > rep.rep_count) {
        throw StudyFailed("N = " + std::to_string(n) + ", component " + std::to_string(m + 1) +
                          ": " + std::to_string(rep.failures) + " of " +
                          std::to_string(rep.rep_count) + " replications failed");
      }
      out.reports.push_back(std::move(rep));
    }
  }
  return out;
}

CompareSummary compare_report(const MonteCarloReport& report, double rel_tol, double mean_abs_tol) {
  CompareSummary s;
  s.component = report.component;
  s.n_obs = report.n_obs;
  const Eigen::Index d = report.mean_b.size();
  for (Eigen::Index i = 0; i < d; ++i) {
    CompareCell c{"mean b" + std::to_string(i), report.mean_b(i), report.true_b(i), false};
    c.pass = std::abs(c.value - c.target) <= mean_abs_tol;
    s.cells.push_back(c);
  }
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index k = i; k < d; ++k) {
      const std::string name = i == k
                                   ? "N*Var b" + std::to_string(i)
                                   : "N*Cov(b" + std::to_string(i) + ",b" + std::to_string(k) + ")";
      CompareCell c{name, report.scaled_cov(i, k), report.analytic_v(i, k), false};
      c.pass = std::abs(c.value - c.target) <= rel_tol * std::abs(c.target);
      s.cells.push_back(c);
    }
  }
  for (const auto& c : s.cells) s.pass = s.pass && c.pass;
  return s;
}

}  // namespace mvcreg
