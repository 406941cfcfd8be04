#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "mvcreg/asymptotic.hpp"
#include "mvcreg/concentrations.hpp"
#include "mvcreg/moments.hpp"

namespace mvcreg {

inline constexpr double kDefaultXtxTol = 1e10;

struct FitOptions {
  double det_tol = kDefaultDetTol;
  double xtx_tol = kDefaultXtxTol;
  // Fit components on separate threads. Results are identical either way.
  bool parallel = false;
};

struct ComponentFit {
  std::size_t component = 0;
  bool ok = false;
  Eigen::VectorXd coefficients;
  double xtx_condition = 0.0;  // 2-norm condition number of (1/N) X^T A X
  // X^T A X may be indefinite because of negative weights.
  std::size_t negative_eigenvalues = 0;
  std::string error_code;
  std::string error_message;
};

struct FitResult {
  Eigen::MatrixXd coefficients;  // M x d; rows of failed components are NaN
  double det_gamma = 0.0;
  std::vector<ComponentFit> components;
  std::vector<std::optional<AsymptoticCovariance>> plug_in_cov;
  std::size_t n_obs = 0;

  bool all_ok() const noexcept;
};

// Solves (X^T A X) b = X^T A Y for the weights in `a_col`. `m` only labels
// errors. Throws DegenerateWeights or SingularNormalMatrix.
ComponentFit fit_with_weights(const Dataset& data, const Eigen::VectorXd& a_col, std::size_t m,
                              double xtx_tol = kDefaultXtxTol);

ComponentFit fit_component(const Dataset& data, const ConcentrationMatrix& p, std::size_t m,
                           double det_tol = kDefaultDetTol, double xtx_tol = kDefaultXtxTol);

// Fits all components from one set of weights. SingularGramian is thrown;
// per-component failures are recorded in `components`.
FitResult fit_all(const Dataset& data, const ConcentrationMatrix& p, const FitOptions& opts = {});
FitResult fit_all(const Dataset& data, const ConcentrationMatrix& p, const WeightMatrix& a,
                  double det_gamma, const FitOptions& opts = {});

}  // namespace mvcreg
