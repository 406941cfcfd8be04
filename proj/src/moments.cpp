#include "mvcreg/moments.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "mvcreg/errors.hpp"

namespace mvcreg {

namespace {

void check_weights(const Dataset& data, const Eigen::VectorXd& a_col) {
  if (static_cast<std::size_t>(a_col.size()) != data.n_obs()) {
    throw InvalidInput("weight vector has length " + std::to_string(a_col.size()) +
                       " but the dataset has " + std::to_string(data.n_obs()) + " rows");
  }
}

}  // namespace

Dataset::Dataset(Eigen::VectorXd y, Eigen::MatrixXd x) : y_(std::move(y)), x_(std::move(x)) {
  if (y_.size() != x_.rows()) {
    throw InvalidInput("y has " + std::to_string(y_.size()) + " entries but x has " +
                       std::to_string(x_.rows()) + " rows");
  }
  if (x_.cols() < 1) throw InvalidInput("at least one regressor is required");
  if (x_.rows() <= x_.cols()) {
    throw InvalidInput("N = " + std::to_string(x_.rows()) +
                       " must exceed d = " + std::to_string(x_.cols()));
  }
  for (Eigen::Index j = 0; j < x_.rows(); ++j) {
    if (!std::isfinite(y_(j)) || !x_.row(j).allFinite()) {
      throw InvalidInput("non-finite value in data row " + std::to_string(j));
    }
  }
}

double Tensor4::quadratic_form(std::size_t i, std::size_t k, const Eigen::VectorXd& u) const {
  double s = 0.0;
  for (std::size_t q = 0; q < d_; ++q) {
    for (std::size_t l = 0; l < d_; ++l) s += (*this)(i, k, q, l) * u(q) * u(l);
  }
  return s;
}

Eigen::VectorXd weighted_moment(const Dataset& data, const Eigen::VectorXd& a_col,
                                const MomentFunction& g) {
  check_weights(data, a_col);
  Eigen::VectorXd acc;
  for (Eigen::Index j = 0; j < data.x().rows(); ++j) {
    Eigen::VectorXd v = g(data.y()(j), data.x().row(j));
    if (!v.allFinite()) throw NonFiniteMoment(static_cast<std::size_t>(j));
    if (j == 0) {
      acc = a_col(j) * v;
    } else {
      if (v.size() != acc.size()) {
        throw InvalidInput("moment function changed output dimension at row " + std::to_string(j));
      }
      acc += a_col(j) * v;
    }
  }
  return acc / static_cast<double>(data.n_obs());
}

RegressionMoments component_regression_moments(const Dataset& data, const Eigen::VectorXd& a_col) {
  check_weights(data, a_col);
  const auto& x = data.x();
  const Eigen::Index d = x.cols();
  RegressionMoments out{Eigen::MatrixXd::Zero(d, d), Eigen::VectorXd::Zero(d)};
  for (Eigen::Index j = 0; j < x.rows(); ++j) {
    const double w = a_col(j);
    for (Eigen::Index i = 0; i < d; ++i) {
      const double wx = w * x(j, i);
      for (Eigen::Index k = i; k < d; ++k) out.xtx(i, k) += wx * x(j, k);
      out.xty(i) += wx * data.y()(j);
    }
  }
  const double n = static_cast<double>(x.rows());
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index k = i; k < d; ++k) out.xtx(k, i) = out.xtx(i, k) /= n;
  }
  out.xty /= n;
  return out;
}

double objective(const Dataset& data, const Eigen::VectorXd& a_col, const Eigen::VectorXd& b) {
  check_weights(data, a_col);
  double s = 0.0;
  for (Eigen::Index j = 0; j < data.x().rows(); ++j) {
    const double r = data.y()(j) - data.x().row(j).dot(b);
    s += a_col(j) * r * r;
  }
  return s / static_cast<double>(data.n_obs());
}

Tensor4 weighted_fourth_moments(const Dataset& data, const Eigen::VectorXd& a_col) {
  check_weights(data, a_col);
  const auto& x = data.x();
  const std::size_t d = data.n_regressors();
  const double n = static_cast<double>(data.n_obs());
  Tensor4 t(d);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t k = i; k < d; ++k) {
      for (std::size_t q = k; q < d; ++q) {
        for (std::size_t l = q; l < d; ++l) {
          double s = 0.0;
          const auto ii = static_cast<Eigen::Index>(i), kk = static_cast<Eigen::Index>(k),
                     qq = static_cast<Eigen::Index>(q), ll = static_cast<Eigen::Index>(l);
          for (Eigen::Index j = 0; j < x.rows(); ++j) {
            s += a_col(j) * x(j, ii) * x(j, kk) * x(j, qq) * x(j, ll);
          }
          s /= n;
          std::array<std::size_t, 4> idx{i, k, q, l};
          do {
            t(idx[0], idx[1], idx[2], idx[3]) = s;
          } while (std::next_permutation(idx.begin(), idx.end()));
        }
      }
    }
  }
  return t;
}

}  // namespace mvcreg
