#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <vector>

namespace mvcreg {

enum class CovarianceMode { analytic, plug_in };

// Sigma and V = D^{-1} Sigma D^{-1} for one component's estimator.
struct AsymptoticCovariance {
  Eigen::MatrixXd sigma;
  Eigen::MatrixXd v;
  std::size_t component = 0;
  CovarianceMode mode = CovarianceMode::analytic;
  // Plug-in only: components whose residual variance estimate came out
  // negative and was clamped to zero, with the raw values.
  std::vector<std::size_t> clamped_components;
  std::vector<double> clamped_values;

  bool degenerate_variance() const noexcept { return !clamped_components.empty(); }
  // sqrt(V_ii / N)
  Eigen::VectorXd standard_errors(std::size_t n_obs) const;
};

}  // namespace mvcreg
