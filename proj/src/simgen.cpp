#include "mvcreg/simgen.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <string>
#include <thread>

#include "mvcreg/errors.hpp"
#include "mvcreg/rng.hpp"

namespace mvcreg {

namespace {

std::string component_path(std::size_t k) { return "components[" + std::to_string(k) + "]"; }

double raw_moment(const RegressorSpec& r, int order) {
  if (r.kind == RegressorSpec::Kind::constant) return std::pow(r.mean, order);
  const double mu = r.mean;
  const double v = r.sd * r.sd;
  switch (order) {
    case 0:
      return 1.0;
    case 1:
      return mu;
    case 2:
      return mu * mu + v;
    case 3:
      return mu * mu * mu + 3.0 * mu * v;
    case 4:
      return mu * mu * mu * mu + 6.0 * mu * mu * v + 3.0 * v * v;
    default:
      throw InvalidInput("raw moments above order 4 are not needed");
  }
}

double product_moment(const std::vector<RegressorSpec>& regs,
                      std::initializer_list<std::size_t> idx) {
  std::vector<int> counts(regs.size(), 0);
  for (auto i : idx) ++counts[i];
  double out = 1.0;
  for (std::size_t i = 0; i < regs.size(); ++i) {
    if (counts[i] > 0) out *= raw_moment(regs[i], counts[i]);
  }
  return out;
}

}  // namespace

std::size_t SimulationConfig::n_regressors() const {
  return components.empty() ? 0 : components.front().regressors.size();
}

void SimulationConfig::validate() const {
  if (n_components < 1) throw ConfigError("n_components", "must be at least 1");
  if (components.size() != n_components) {
    throw ConfigError("components", "expected " + std::to_string(n_components) +
                                        " component specs, got " +
                                        std::to_string(components.size()));
  }
  const std::size_t d = n_regressors();
  if (d < 1) throw ConfigError(component_path(0) + ".regressors", "must not be empty");
  for (std::size_t k = 0; k < components.size(); ++k) {
    const auto& c = components[k];
    if (c.regressors.size() != d) {
      throw ConfigError(component_path(k) + ".regressors",
                        "has " + std::to_string(c.regressors.size()) +
                            " entries; all components must share d = " + std::to_string(d));
    }
    for (std::size_t i = 0; i < d; ++i) {
      const auto& r = c.regressors[i];
      const std::string path = component_path(k) + ".regressors[" + std::to_string(i) + "]";
      if (!std::isfinite(r.mean)) throw ConfigError(path + ".mean", "must be finite");
      if (r.kind == RegressorSpec::Kind::gaussian && !(r.sd > 0.0 && std::isfinite(r.sd))) {
        throw ConfigError(path + ".sd", "must be positive");
      }
    }
    if (!(c.error_sd > 0.0) || !std::isfinite(c.error_sd)) {
      throw ConfigError(component_path(k) + ".error_sd", "must be positive");
    }
    if (static_cast<std::size_t>(c.true_b.size()) != d) {
      throw ConfigError(component_path(k) + ".true_b",
                        "must have " + std::to_string(d) + " entries");
    }
    if (!c.true_b.allFinite()) throw ConfigError(component_path(k) + ".true_b", "must be finite");
  }
  if (n_obs <= d) {
    throw ConfigError("n_obs", "must exceed the number of regressors (" + std::to_string(d) + ")");
  }
  if (concentration_model == ConcentrationModel::linear_ramp) {
    if (n_components != 2) {
      throw ConfigError("concentrations.model", "linear_ramp requires exactly 2 components");
    }
  } else {
    if (!explicit_concentrations) {
      throw ConfigError("concentrations.matrix", "required for the explicit model");
    }
    const auto& mat = *explicit_concentrations;
    if (static_cast<std::size_t>(mat.rows()) != n_obs ||
        static_cast<std::size_t>(mat.cols()) != n_components) {
      throw ConfigError("concentrations.matrix", "must be n_obs x n_components (" +
                                                     std::to_string(n_obs) + " x " +
                                                     std::to_string(n_components) + ")");
    }
    try {
      ConcentrationMatrix check(mat);
    } catch (const InvalidInput& e) {
      throw ConfigError("concentrations.matrix", e.what());
    }
  }
}

ConcentrationMatrix SimulationConfig::concentrations() const {
  if (concentration_model == ConcentrationModel::linear_ramp) {
    return ConcentrationMatrix::linear_ramp(n_obs);
  }
  return ConcentrationMatrix(*explicit_concentrations);
}

SimulationConfig reference_design(std::size_t n_obs, std::uint64_t seed) {
  SimulationConfig c;
  c.n_obs = n_obs;
  c.n_components = 2;
  c.concentration_model = ConcentrationModel::linear_ramp;
  c.seed = seed;
  ComponentSpec first;
  first.regressors = {RegressorSpec::constant(), RegressorSpec::gaussian(1.0, 1.0)};
  first.error_sd = 0.01;
  first.true_b = Eigen::Vector2d(3.0, 0.5);
  ComponentSpec second;
  second.regressors = {RegressorSpec::constant(), RegressorSpec::gaussian(2.0, 1.5)};
  second.error_sd = 0.05;
  second.true_b = Eigen::Vector2d(-2.0, 1.0);
  c.components = {first, second};
  return c;
}

SimulatedDataset generate(const SimulationConfig& config, std::size_t threads) {
  config.validate();
  ConcentrationMatrix p = config.concentrations();
  const auto n = static_cast<Eigen::Index>(config.n_obs);
  const auto d = static_cast<Eigen::Index>(config.n_regressors());
  const auto mc = static_cast<Eigen::Index>(config.n_components);
  Eigen::VectorXd y(n);
  Eigen::MatrixXd x(n, d);
  std::vector<int> labels(config.n_obs);

  auto fill = [&](Eigen::Index begin, Eigen::Index end) {
    for (Eigen::Index j = begin; j < end; ++j) {
      SplitMix64 rng(derive_seed(config.seed, static_cast<std::uint64_t>(j)));
      const double u = rng.uniform();
      Eigen::Index k = 0;
      double cum = p.values()(j, 0);
      while (u >= cum && k + 1 < mc) cum += p.values()(j, ++k);
      // Skip trailing zero-probability components reached by rounding.
      while (k > 0 && p.values()(j, k) == 0.0) --k;
      labels[static_cast<std::size_t>(j)] = static_cast<int>(k);

      const auto& spec = config.components[static_cast<std::size_t>(k)];
      std::normal_distribution<double> normal(0.0, 1.0);
      for (Eigen::Index i = 0; i < d; ++i) {
        const auto& r = spec.regressors[static_cast<std::size_t>(i)];
        x(j, i) = r.kind == RegressorSpec::Kind::constant ? r.mean : r.mean + r.sd * normal(rng);
      }
      const double eps = spec.error_sd * normal(rng);
      y(j) = x.row(j).dot(spec.true_b) + eps;
    }
  };

  threads = std::max<std::size_t>(1, std::min<std::size_t>(threads, config.n_obs / 1024 + 1));
  if (threads == 1) {
    fill(0, n);
  } else {
    std::vector<std::thread> pool;
    const Eigen::Index chunk =
        (n + static_cast<Eigen::Index>(threads) - 1) / static_cast<Eigen::Index>(threads);
    for (Eigen::Index b = 0; b < n; b += chunk) pool.emplace_back(fill, b, std::min(n, b + chunk));
    for (auto& t : pool) t.join();
  }
  return {Dataset(std::move(y), std::move(x)), std::move(p), std::move(labels)};
}

ComponentMoments analytic_component_moments(const ComponentSpec& spec) {
  const std::size_t d = spec.regressors.size();
  ComponentMoments out;
  out.b = spec.true_b;
  out.sigma2 = spec.error_sd * spec.error_sd;
  out.d2.resize(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  out.l4 = Tensor4(d);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t k = 0; k < d; ++k) {
      out.d2(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
          product_moment(spec.regressors, {i, k});
      for (std::size_t q = 0; q < d; ++q) {
        for (std::size_t l = 0; l < d; ++l) {
          out.l4(i, k, q, l) = product_moment(spec.regressors, {i, k, q, l});
        }
      }
    }
  }
  return out;
}

Eigen::MatrixXd limiting_co_moments(const SimulationConfig& config, std::size_t m) {
  if (m >= config.n_components) throw InvalidInput("component index out of range");
  if (config.concentration_model == ConcentrationModel::explicit_matrix) {
    const ConcentrationMatrix p = config.concentrations();
    const WeightMatrix a = compute_weights(p, build_gramian(p), 0.0);
    return weight_co_moments(a, p, m);
  }
  // 5-point Gauss-Legendre on [0,1]; exact for the degree-4 integrands here.
  static constexpr std::array<double, 5> nodes{-0.9061798459386640, -0.5384693101056831, 0.0,
                                               0.5384693101056831, 0.9061798459386640};
  static constexpr std::array<double, 5> weights{0.2369268850561891, 0.4786286704993665,
                                                 0.5688888888888889, 0.4786286704993665,
                                                 0.2369268850561891};
  auto ramp = [](double t) { return Eigen::Vector2d(t, 1.0 - t); };
  Eigen::Matrix2d gamma = Eigen::Matrix2d::Zero();
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const double t = 0.5 * (nodes[i] + 1.0);
    const Eigen::Vector2d pt = ramp(t);
    gamma += 0.5 * weights[i] * pt * pt.transpose();
  }
  const Eigen::Matrix2d inv = gamma.inverse();
  Eigen::Matrix2d out = Eigen::Matrix2d::Zero();
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const double t = 0.5 * (nodes[i] + 1.0);
    const Eigen::Vector2d pt = ramp(t);
    const double am = inv.row(static_cast<Eigen::Index>(m)).dot(pt);
    out += 0.5 * weights[i] * am * am * pt * pt.transpose();
  }
  return out;
}

}  // namespace mvcreg
