#include <doctest.h>

#include <cmath>
#include <random>

#include "mvcreg/concentrations.hpp"
#include "mvcreg/errors.hpp"
#include "mvcreg/moments.hpp"
#include "mvcreg/simgen.hpp"
#include "test_support.hpp"

using namespace mvcreg;

namespace {

Dataset tiny() {
  Eigen::VectorXd y(2);
  y << 1, 4;
  Eigen::MatrixXd x(2, 1);
  x << 1, 2;
  return Dataset(y, x);
}

// Mean and 3-sigma band of (1/N) sum_j a_j g_j, treating the summands as
// independent.
struct Band {
  double mean;
  double half_width;
};

Band band(const Eigen::VectorXd& terms) {
  const double n = static_cast<double>(terms.size());
  const double mean = terms.mean();
  const double var = (terms.array() - mean).square().sum() / (n - 1);
  return {mean, 3.0 * std::sqrt(var / n)};
}

}  // namespace

TEST_CASE("dataset validation") {
  CHECK_THROWS_AS(Dataset(Eigen::VectorXd::Zero(3), Eigen::MatrixXd::Zero(2, 1)), InvalidInput);
  CHECK_THROWS_AS(Dataset(Eigen::VectorXd::Zero(2), Eigen::MatrixXd::Zero(2, 2)), InvalidInput);
  Eigen::VectorXd y = Eigen::VectorXd::Zero(3);
  y(1) = std::nan("");
  CHECK_THROWS_AS(Dataset(y, Eigen::MatrixXd::Zero(3, 1)), InvalidInput);
}

TEST_CASE("weighted_moment basics") {
  std::mt19937_64 rng(3);
  const Dataset data = testing::random_dataset(rng, 50, 2);
  const ConcentrationMatrix p(testing::random_concentrations(rng, 50, 3));
  const auto a = compute_weights(p, build_gramian(p), 0.0);

  auto one = [](double, const auto&) { return Eigen::VectorXd::Ones(1); };
  for (int m = 0; m < 3; ++m) {
    // sum_k <a^m p^k> = 1 because rows of p sum to one.
    CHECK(weighted_moment(data, a.values.col(m), one)(0) == doctest::Approx(1.0).epsilon(1e-10));
  }

  auto ident_y = [](double y, const auto&) { return Eigen::VectorXd::Constant(1, y); };
  CHECK(weighted_moment(data, Eigen::VectorXd::Ones(50), ident_y)(0) ==
        doctest::Approx(data.y().mean()).epsilon(1e-14));

  auto bad = [](double y, const auto&) {
    return Eigen::VectorXd::Constant(1, y > 0 ? std::log(-1.0) : 0.0);
  };
  Eigen::VectorXd y = Eigen::VectorXd::Constant(5, -1.0);
  y(3) = 2.0;
  const Dataset with_pos(y, Eigen::MatrixXd::Ones(5, 1));
  try {
    weighted_moment(with_pos, Eigen::VectorXd::Ones(5), bad);
    FAIL("expected NonFiniteMoment");
  } catch (const NonFiniteMoment& e) {
    CHECK(e.row() == 3);
  }
}

TEST_CASE("weighted_moment is linear in g") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const Dataset data = testing::random_dataset(rng, 40, 3);
    Eigen::VectorXd w = Eigen::VectorXd::Random(40);
    const double alpha = 1.7, beta = -0.3;
    auto g1 = [](double y, const Eigen::Ref<const Eigen::RowVectorXd>& x) {
      Eigen::VectorXd v(2);
      v << y * x(0), x(1) * x(2);
      return v;
    };
    auto g2 = [](double y, const Eigen::Ref<const Eigen::RowVectorXd>& x) {
      Eigen::VectorXd v(2);
      v << std::sin(y), x.sum();
      return v;
    };
    auto combo = [&](double y, const Eigen::Ref<const Eigen::RowVectorXd>& x) {
      return Eigen::VectorXd(alpha * g1(y, x) + beta * g2(y, x));
    };
    const Eigen::VectorXd lhs = weighted_moment(data, w, combo);
    const Eigen::VectorXd rhs =
        alpha * weighted_moment(data, w, g1) + beta * weighted_moment(data, w, g2);
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("regression moments") {
  const auto rm = component_regression_moments(tiny(), Eigen::Vector2d(2, 0));
  CHECK(rm.xtx(0, 0) == doctest::Approx(1.0));
  CHECK(rm.xty(0) == doctest::Approx(1.0));

  std::mt19937_64 rng(4);
  const Dataset data = testing::random_dataset(rng, 30, 3);
  const auto ones = component_regression_moments(data, Eigen::VectorXd::Ones(30));
  const Eigen::MatrixXd xtx = data.x().transpose() * data.x() / 30.0;
  const Eigen::VectorXd xty = data.x().transpose() * data.y() / 30.0;
  CHECK((ones.xtx - xtx).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((ones.xty - xty).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(ones.xtx.isApprox(ones.xtx.transpose(), 0.0));
}

TEST_CASE("objective") {
  Eigen::MatrixXd x(3, 1);
  x << 1, 2, 3;
  const Dataset exact(2.0 * x.col(0), x);
  CHECK(objective(exact, Eigen::Vector3d(1, -2, 5), Eigen::VectorXd::Constant(1, 2.0)) == 0.0);

  std::mt19937_64 rng(12);
  const Dataset data = testing::random_dataset(rng, 80, 3);
  CHECK(objective(data, Eigen::VectorXd::Ones(80), Eigen::VectorXd::Zero(3)) ==
        doctest::Approx(data.y().squaredNorm() / 80.0).epsilon(1e-13));

  // With unit weights the OLS solution is a local minimum on a +-0.01 grid.
  const Eigen::VectorXd ols = data.x().colPivHouseholderQr().solve(data.y());
  const double best = objective(data, Eigen::VectorXd::Ones(80), ols);
  for (int i = 0; i < 3; ++i) {
    for (double eps : {-0.01, 0.01}) {
      Eigen::VectorXd b = ols;
      b(i) += eps;
      CHECK(objective(data, Eigen::VectorXd::Ones(80), b) > best);
    }
  }
}

TEST_CASE("fourth-moment tensor is symmetric and matches brute force") {
  std::mt19937_64 rng(6);
  const Dataset data = testing::random_dataset(rng, 25, 3);
  const Eigen::VectorXd w = Eigen::VectorXd::Random(25);
  const Tensor4 t = weighted_fourth_moments(data, w);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t k = 0; k < 3; ++k)
      for (std::size_t q = 0; q < 3; ++q)
        for (std::size_t l = 0; l < 3; ++l) {
          double s = 0.0;
          for (int j = 0; j < 25; ++j) {
            s += w(j) * data.x()(j, i) * data.x()(j, k) * data.x()(j, q) * data.x()(j, l);
          }
          CHECK(t(i, k, q, l) == doctest::Approx(s / 25.0).epsilon(1e-12));
          CHECK(t(i, k, q, l) == t(k, i, l, q));
          CHECK(t(i, k, q, l) == t(q, l, i, k));
        }
}

TEST_CASE("weighted moments recover component means of the reference design") {
  SimulationConfig config = reference_design(100'000, 77);
  const auto sim = generate(config);
  const auto a = compute_weights(sim.p, build_gramian(sim.p));
  const Eigen::VectorXd a1 = a.values.col(0);

  auto gx = [](double, const Eigen::Ref<const Eigen::RowVectorXd>& x) {
    return Eigen::VectorXd::Constant(1, x(1));
  };
  const double mean_x = weighted_moment(sim.data, a1, gx)(0);
  const Band bx = band(a1.cwiseProduct(sim.data.x().col(1)));
  CHECK(mean_x == doctest::Approx(bx.mean));
  CHECK(std::abs(mean_x - 1.0) <= bx.half_width);

  const auto rm = component_regression_moments(sim.data, a1);
  const Eigen::Matrix2d target{{1.0, 1.0}, {1.0, 2.0}};
  for (int i = 0; i < 2; ++i) {
    for (int k = 0; k < 2; ++k) {
      const Band b = band(a1.cwiseProduct(sim.data.x().col(i)).cwiseProduct(sim.data.x().col(k)));
      CHECK(std::abs(rm.xtx(i, k) - target(i, k)) <= b.half_width);
    }
  }
}

TEST_CASE("weighted moment error decreases with N") {
  // Component 1: E[X] = 1, E[X^2] = 2, E[Y] = 3 + 0.5 * 1.
  const Eigen::Vector3d truth(1.0, 2.0, 3.5);
  auto g = [](double y, const Eigen::Ref<const Eigen::RowVectorXd>& x) {
    return Eigen::Vector3d(x(1), x(1) * x(1), y).eval();
  };
  std::vector<double> medians;
  for (std::size_t n : {500, 5000, 50000}) {
    std::vector<double> errs;
    const auto p = ConcentrationMatrix::linear_ramp(n);
    const Eigen::VectorXd a1 = compute_weights(p, build_gramian(p)).values.col(0);
    for (std::uint64_t r = 0; r < 50; ++r) {
      SimulationConfig config = reference_design(n, 1000 + r);
      const auto sim = generate(config);
      const Eigen::VectorXd est = weighted_moment(sim.data, a1, g);
      errs.push_back((est - truth).cwiseAbs().maxCoeff());
    }
    medians.push_back(testing::median(errs));
  }
  CHECK(medians[1] < medians[0]);
  CHECK(medians[2] < medians[1]);
}
