#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <functional>
#include <vector>

namespace mvcreg {

// Responses y (length N) and regressors x (N x d). Any intercept is an
// ordinary column of ones supplied by the caller.
class Dataset {
 public:
  // Throws InvalidInput on non-finite entries, mismatched lengths or N <= d.
  Dataset(Eigen::VectorXd y, Eigen::MatrixXd x);

  const Eigen::VectorXd& y() const noexcept { return y_; }
  const Eigen::MatrixXd& x() const noexcept { return x_; }
  std::size_t n_obs() const noexcept { return static_cast<std::size_t>(y_.size()); }
  std::size_t n_regressors() const noexcept { return static_cast<std::size_t>(x_.cols()); }

 private:
  Eigen::VectorXd y_;
  Eigen::MatrixXd x_;
};

// Dense d x d x d x d tensor of fourth moments E[X^i X^k X^q X^l].
class Tensor4 {
 public:
  Tensor4() = default;
  explicit Tensor4(std::size_t d) : d_(d), data_(d * d * d * d, 0.0) {}

  std::size_t dim() const noexcept { return d_; }
  double& operator()(std::size_t i, std::size_t k, std::size_t q, std::size_t l) {
    return data_[((i * d_ + k) * d_ + q) * d_ + l];
  }
  double operator()(std::size_t i, std::size_t k, std::size_t q, std::size_t l) const {
    return data_[((i * d_ + k) * d_ + q) * d_ + l];
  }
  // sum_{q,l} T(i,k,q,l) u_q u_l
  double quadratic_form(std::size_t i, std::size_t k, const Eigen::VectorXd& u) const;

 private:
  std::size_t d_ = 0;
  std::vector<double> data_;
};

// Moments of one mixture component that enter the asymptotic covariance.
struct ComponentMoments {
  Eigen::MatrixXd d2;   // E[X X^T | component]
  Tensor4 l4;           // E[X^i X^k X^q X^l | component]
  double sigma2 = 0.0;  // error variance
  Eigen::VectorXd b;    // regression coefficients
};

using MomentFunction =
    std::function<Eigen::VectorXd(double y, const Eigen::Ref<const Eigen::RowVectorXd>& x)>;

// (1/N) sum_j a_j g(y_j, x_j). Throws NonFiniteMoment naming the first row
// where g is not finite.
Eigen::VectorXd weighted_moment(const Dataset& data, const Eigen::VectorXd& a_col,
                                const MomentFunction& g);

struct RegressionMoments {
  Eigen::MatrixXd xtx;  // (1/N) sum_j a_j x_j x_j^T
  Eigen::VectorXd xty;  // (1/N) sum_j a_j y_j x_j
};

RegressionMoments component_regression_moments(const Dataset& data, const Eigen::VectorXd& a_col);

// J(b) = (1/N) sum_j a_j (y_j - x_j^T b)^2. Not bounded below when some
// weights are negative.
double objective(const Dataset& data, const Eigen::VectorXd& a_col, const Eigen::VectorXd& b);

// Weighted fourth-moment tensor; each unordered index combination is
// accumulated once and copied to all of its permutations.
Tensor4 weighted_fourth_moments(const Dataset& data, const Eigen::VectorXd& a_col);

}  // namespace mvcreg
