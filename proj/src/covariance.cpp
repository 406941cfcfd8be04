#include "mvcreg/covariance.hpp"

#include <cmath>
#include <string>

#include "mvcreg/errors.hpp"

namespace mvcreg {

namespace {

constexpr double kSingularDCondition = 1e14;

Eigen::MatrixXd sandwich(const Eigen::MatrixXd& d, const Eigen::MatrixXd& sigma, std::size_t m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(d, Eigen::EigenvaluesOnly);
  const Eigen::VectorXd ev = eig.eigenvalues().cwiseAbs();
  if (!(ev.minCoeff() > 0.0) || ev.maxCoeff() / ev.minCoeff() > kSingularDCondition) {
    throw SingularD(m);
  }
  const auto lu = d.partialPivLu();
  const Eigen::MatrixXd left = lu.solve(sigma);          // D^{-1} Sigma
  const Eigen::MatrixXd v = lu.solve(left.transpose());  // D^{-1} (D^{-1} Sigma)^T
  return 0.5 * (v + v.transpose());
}

// Sigma^{ik} = sum_s w_s (D^{ik(s)} sigma_s^2 + D_s^T L^{ik(s)} D_s)
//            - sum_{s,q} C_{sq} (D^(s) delta_s)_i (D^(q) delta_q)_k
// with delta_s = b^(s) - b^(m) and w_s the row sums of C.
Eigen::MatrixXd assemble_sigma(const std::vector<ComponentMoments>& moments,
                               const Eigen::MatrixXd& co, std::size_t m) {
  const std::size_t mc = moments.size();
  const auto d = static_cast<Eigen::Index>(moments[m].b.size());
  Eigen::MatrixXd sigma = Eigen::MatrixXd::Zero(d, d);
  std::vector<Eigen::VectorXd> shifted(mc);
  for (std::size_t s = 0; s < mc; ++s) {
    const auto& cm = moments[s];
    const Eigen::VectorXd delta = cm.b - moments[m].b;
    const double w = co.row(static_cast<Eigen::Index>(s)).sum();
    Eigen::MatrixXd term = cm.d2 * cm.sigma2;
    for (Eigen::Index i = 0; i < d; ++i) {
      for (Eigen::Index k = 0; k < d; ++k) {
        term(i, k) +=
            cm.l4.quadratic_form(static_cast<std::size_t>(i), static_cast<std::size_t>(k), delta);
      }
    }
    sigma += w * term;
    shifted[s] = cm.d2 * delta;
  }
  for (std::size_t s = 0; s < mc; ++s) {
    for (std::size_t q = 0; q < mc; ++q) {
      sigma -= co(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(q)) * shifted[s] *
               shifted[q].transpose();
    }
  }
  return 0.5 * (sigma + sigma.transpose());
}

void check_shapes(const std::vector<ComponentMoments>& moments, const Eigen::MatrixXd& co,
                  std::size_t m) {
  const auto mc = static_cast<Eigen::Index>(moments.size());
  if (m >= moments.size()) throw InvalidInput("component index out of range");
  if (co.rows() != mc || co.cols() != mc) {
    throw InvalidInput("co-moment matrix must be " + std::to_string(mc) + " x " +
                       std::to_string(mc));
  }
  const auto d = moments[m].b.size();
  for (const auto& cm : moments) {
    if (cm.b.size() != d || cm.d2.rows() != d || cm.d2.cols() != d ||
        cm.l4.dim() != static_cast<std::size_t>(d)) {
      throw InvalidInput("component moments disagree on the number of regressors");
    }
  }
}

}  // namespace

Eigen::VectorXd AsymptoticCovariance::standard_errors(std::size_t n_obs) const {
  return (v.diagonal().cwiseMax(0.0) / static_cast<double>(n_obs)).cwiseSqrt();
}

AsymptoticCovariance analytic_sigma(const std::vector<ComponentMoments>& moments,
                                    const Eigen::MatrixXd& co_moments, std::size_t m) {
  check_shapes(moments, co_moments, m);
  AsymptoticCovariance out;
  out.component = m;
  out.mode = CovarianceMode::analytic;
  out.sigma = assemble_sigma(moments, 0.5 * (co_moments + co_moments.transpose()), m);
  out.v = sandwich(moments[m].d2, out.sigma, m);
  return out;
}

std::vector<ComponentMoments> plug_in_moments(const Dataset& data, const WeightMatrix& a,
                                              const FitResult& fit) {
  const std::size_t mc = fit.components.size();
  std::vector<ComponentMoments> out(mc);
  for (std::size_t s = 0; s < mc; ++s) {
    if (!fit.components[s].ok) {
      throw InvalidInput("plug-in covariance needs every component fit; component " +
                         std::to_string(s + 1) + " failed");
    }
    const Eigen::VectorXd col = a.values.col(static_cast<Eigen::Index>(s));
    out[s].b = fit.components[s].coefficients;
    out[s].d2 = component_regression_moments(data, col).xtx;
    out[s].l4 = weighted_fourth_moments(data, col);
    out[s].sigma2 = objective(data, col, out[s].b);
  }
  return out;
}

namespace {

AsymptoticCovariance plug_in_from_moments(std::vector<ComponentMoments> moments,
                                          const ConcentrationMatrix& p, const WeightMatrix& a,
                                          std::size_t m) {
  AsymptoticCovariance out;
  out.component = m;
  out.mode = CovarianceMode::plug_in;
  for (std::size_t s = 0; s < moments.size(); ++s) {
    if (moments[s].sigma2 < 0.0) {
      out.clamped_components.push_back(s);
      out.clamped_values.push_back(moments[s].sigma2);
      moments[s].sigma2 = 0.0;
    }
  }
  const Eigen::MatrixXd co = weight_co_moments(a, p, m);
  check_shapes(moments, co, m);
  out.sigma = assemble_sigma(moments, co, m);
  out.v = sandwich(moments[m].d2, out.sigma, m);
  return out;
}

}  // namespace

AsymptoticCovariance plug_in_covariance(const Dataset& data, const ConcentrationMatrix& p,
                                        const WeightMatrix& a, const FitResult& fit,
                                        std::size_t m) {
  if (m >= fit.components.size()) throw InvalidInput("component index out of range");
  return plug_in_from_moments(plug_in_moments(data, a, fit), p, a, m);
}

AsymptoticCovariance plug_in_covariance(const Dataset& data, const ConcentrationMatrix& p,
                                        const FitResult& fit, std::size_t m) {
  const GramianSummary g = build_gramian(p);
  const WeightMatrix a = compute_weights(p, g, 0.0);
  return plug_in_covariance(data, p, a, fit, m);
}

void attach_plug_in_covariance(FitResult& fit, const Dataset& data, const ConcentrationMatrix& p,
                               const WeightMatrix& a) {
  fit.plug_in_cov.assign(fit.components.size(), std::nullopt);
  if (!fit.all_ok()) return;
  const std::vector<ComponentMoments> moments = plug_in_moments(data, a, fit);
  for (std::size_t m = 0; m < fit.components.size(); ++m) {
    fit.plug_in_cov[m] = plug_in_from_moments(moments, p, a, m);
  }
}

}  // namespace mvcreg
