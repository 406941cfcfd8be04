#include "mvcreg/estimator.hpp"

#include <lapacke.h>

#include <cmath>
#include <future>
#include <limits>

#include "mvcreg/errors.hpp"

namespace mvcreg {

namespace {

// Bunch-Kaufman factorization; valid for indefinite symmetric matrices.
Eigen::VectorXd solve_symmetric(const Eigen::MatrixXd& a, const Eigen::VectorXd& rhs) {
  const lapack_int n = static_cast<lapack_int>(a.rows());
  Eigen::MatrixXd lu = a;  // column-major
  Eigen::VectorXd x = rhs;
  std::vector<lapack_int> ipiv(static_cast<std::size_t>(n));
  const lapack_int info =
      LAPACKE_dsysv(LAPACK_COL_MAJOR, 'U', n, 1, lu.data(), n, ipiv.data(), x.data(), n);
  if (info != 0) {
    x.setConstant(std::numeric_limits<double>::quiet_NaN());
  }
  return x;
}

}  // namespace

bool FitResult::all_ok() const noexcept {
  for (const auto& c : components) {
    if (!c.ok) return false;
  }
  return true;
}

ComponentFit fit_with_weights(const Dataset& data, const Eigen::VectorXd& a_col, std::size_t m,
                              double xtx_tol) {
  const double mean_abs = a_col.cwiseAbs().sum() / static_cast<double>(a_col.size());
  if (mean_abs < 1e-12) throw DegenerateWeights(m, mean_abs);

  const RegressionMoments rm = component_regression_moments(data, a_col);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(rm.xtx, Eigen::EigenvaluesOnly);
  const Eigen::VectorXd ev = eig.eigenvalues();
  const double max_abs = ev.cwiseAbs().maxCoeff();
  const double min_abs = ev.cwiseAbs().minCoeff();
  const double cond = min_abs > 0.0 ? max_abs / min_abs : std::numeric_limits<double>::infinity();

  ComponentFit fit;
  fit.component = m;
  fit.xtx_condition = cond;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev(i) < 0.0) ++fit.negative_eigenvalues;
  }
  if (!(cond <= xtx_tol)) throw SingularNormalMatrix(m, cond, xtx_tol);

  fit.coefficients = solve_symmetric(rm.xtx, rm.xty);
  if (!fit.coefficients.allFinite()) throw SingularNormalMatrix(m, cond, xtx_tol);
  fit.ok = true;
  return fit;
}

ComponentFit fit_component(const Dataset& data, const ConcentrationMatrix& p, std::size_t m,
                           double det_tol, double xtx_tol) {
  if (p.n_obs() != data.n_obs()) {
    throw InvalidInput("dataset has " + std::to_string(data.n_obs()) +
                       " rows but concentrations have " + std::to_string(p.n_obs()));
  }
  if (m >= p.n_components()) throw InvalidInput("component index out of range");
  const GramianSummary g = build_gramian(p);
  const WeightMatrix a = compute_weights(p, g, det_tol);
  return fit_with_weights(data, a.values.col(static_cast<Eigen::Index>(m)), m, xtx_tol);
}

FitResult fit_all(const Dataset& data, const ConcentrationMatrix& p, const FitOptions& opts) {
  if (p.n_obs() != data.n_obs()) {
    throw InvalidInput("dataset has " + std::to_string(data.n_obs()) +
                       " rows but concentrations have " + std::to_string(p.n_obs()));
  }
  const GramianSummary g = build_gramian(p);
  const WeightMatrix a = compute_weights(p, g, opts.det_tol);
  return fit_all(data, p, a, g.det_gamma, opts);
}

FitResult fit_all(const Dataset& data, const ConcentrationMatrix& p, const WeightMatrix& a,
                  double det_gamma, const FitOptions& opts) {
  const std::size_t mc = p.n_components();
  const auto d = static_cast<Eigen::Index>(data.n_regressors());

  auto run = [&](std::size_t m) {
    try {
      return fit_with_weights(data, a.values.col(static_cast<Eigen::Index>(m)), m, opts.xtx_tol);
    } catch (const SingularNormalMatrix& e) {
      ComponentFit f;
      f.component = m;
      f.xtx_condition = e.condition();
      f.error_code = e.code();
      f.error_message = e.what();
      return f;
    } catch (const DegenerateWeights& e) {
      ComponentFit f;
      f.component = m;
      f.error_code = e.code();
      f.error_message = e.what();
      return f;
    }
  };

  FitResult out;
  out.det_gamma = det_gamma;
  out.n_obs = data.n_obs();
  out.components.resize(mc);
  if (opts.parallel && mc > 1) {
    std::vector<std::future<ComponentFit>> jobs;
    for (std::size_t m = 0; m < mc; ++m) jobs.push_back(std::async(std::launch::async, run, m));
    for (std::size_t m = 0; m < mc; ++m) out.components[m] = jobs[m].get();
  } else {
    for (std::size_t m = 0; m < mc; ++m) out.components[m] = run(m);
  }

  out.coefficients = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(mc), d,
                                               std::numeric_limits<double>::quiet_NaN());
  for (std::size_t m = 0; m < mc; ++m) {
    if (out.components[m].ok) {
      out.coefficients.row(static_cast<Eigen::Index>(m)) =
          out.components[m].coefficients.transpose();
    }
  }
  out.plug_in_cov.resize(mc);
  return out;
}

}  // namespace mvcreg
