#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "mvcreg/concentrations.hpp"
#include "mvcreg/moments.hpp"

namespace mvcreg {

struct RegressorSpec {
  enum class Kind { gaussian, constant };
  Kind kind = Kind::constant;
  double mean = 1.0;  // for constant: the value
  double sd = 0.0;

  static RegressorSpec gaussian(double mean, double sd) { return {Kind::gaussian, mean, sd}; }
  static RegressorSpec constant(double value = 1.0) { return {Kind::constant, value, 0.0}; }
};

struct ComponentSpec {
  std::vector<RegressorSpec> regressors;
  double error_sd = 1.0;
  Eigen::VectorXd true_b;
};

enum class ConcentrationModel { linear_ramp, explicit_matrix };

struct SimulationConfig {
  std::size_t n_obs = 0;
  std::size_t n_components = 0;
  ConcentrationModel concentration_model = ConcentrationModel::linear_ramp;
  std::optional<Eigen::MatrixXd> explicit_concentrations;
  std::vector<ComponentSpec> components;
  std::uint64_t seed = 0;

  std::size_t n_regressors() const;
  // Throws ConfigError naming the offending field.
  void validate() const;
  ConcentrationMatrix concentrations() const;
};

// Two components, p^1_j = j/N; X ~ N(1,1) with b = (3, 0.5) and error sd
// 0.01; X ~ N(2, 2.25) with b = (-2, 1) and error sd 0.05. Intercept is the
// first regressor.
SimulationConfig reference_design(std::size_t n_obs, std::uint64_t seed);

struct SimulatedDataset {
  Dataset data;
  ConcentrationMatrix p;
  std::vector<int> labels;  // 0-based component of each observation
};

// Observation j uses its own generator keyed by (seed, j), so the output
// does not depend on `threads`.
SimulatedDataset generate(const SimulationConfig& config, std::size_t threads = 1);

// Closed-form D, L, sigma^2 and b for independent gaussian/constant regressors.
ComponentMoments analytic_component_moments(const ComponentSpec& spec);

// Limiting <(a^m)^2 p^s p^q>. Linear ramp: Gauss-Legendre quadrature of the
// limit weight functions. Explicit matrix: the finite-N value.
Eigen::MatrixXd limiting_co_moments(const SimulationConfig& config, std::size_t m);

}  // namespace mvcreg
