#include "mvcreg/concentrations.hpp"

#include <cmath>
#include <string>

#include "mvcreg/errors.hpp"

namespace mvcreg {

namespace {

double det_small(const Eigen::MatrixXd& a) {
  switch (a.rows()) {
    case 0:
      return 1.0;
    case 1:
      return a(0, 0);
    case 2:
      return a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
    case 3:
      return a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) -
             a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0)) +
             a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0));
    default:
      break;
  }
  // Cofactor expansion along the first row.
  double det = 0.0;
  for (Eigen::Index c = 0; c < a.cols(); ++c) {
    Eigen::MatrixXd sub(a.rows() - 1, a.cols() - 1);
    for (Eigen::Index r = 1; r < a.rows(); ++r) {
      Eigen::Index cc = 0;
      for (Eigen::Index k = 0; k < a.cols(); ++k) {
        if (k != c) sub(r - 1, cc++) = a(r, k);
      }
    }
    det += ((c % 2 == 0) ? 1.0 : -1.0) * a(0, c) * det_small(sub);
  }
  return det;
}

Eigen::MatrixXd without(const Eigen::MatrixXd& a, Eigen::Index row, Eigen::Index col) {
  Eigen::MatrixXd sub(a.rows() - 1, a.cols() - 1);
  for (Eigen::Index r = 0, rr = 0; r < a.rows(); ++r) {
    if (r == row) continue;
    for (Eigen::Index c = 0, cc = 0; c < a.cols(); ++c) {
      if (c == col) continue;
      sub(rr, cc++) = a(r, c);
    }
    ++rr;
  }
  return sub;
}

double determinant(const Eigen::MatrixXd& a) {
  if (a.rows() <= 4) return det_small(a);
  return a.partialPivLu().determinant();
}

}  // namespace

ConcentrationMatrix::ConcentrationMatrix(Eigen::MatrixXd values, double row_sum_tol)
    : values_(std::move(values)) {
  if (values_.cols() < 1) throw InvalidInput("concentration matrix needs at least one column");
  if (values_.rows() < values_.cols()) {
    throw InvalidInput("concentration matrix has N = " + std::to_string(values_.rows()) +
                       " rows but M = " + std::to_string(values_.cols()) +
                       " components; N >= M is required");
  }
  for (Eigen::Index j = 0; j < values_.rows(); ++j) {
    for (Eigen::Index k = 0; k < values_.cols(); ++k) {
      const double v = values_(j, k);
      if (!(v >= 0.0 && v <= 1.0)) {
        throw InvalidInput("concentration p[" + std::to_string(j) + "][" + std::to_string(k) +
                           "] = " + std::to_string(v) + " is outside [0,1]");
      }
    }
    const double s = values_.row(j).sum();
    if (std::abs(s - 1.0) > row_sum_tol) {
      throw InvalidInput("concentration row " + std::to_string(j) + " sums to " +
                         std::to_string(s) + ", not 1");
    }
  }
}

ConcentrationMatrix ConcentrationMatrix::linear_ramp(std::size_t n_obs) {
  Eigen::MatrixXd p(static_cast<Eigen::Index>(n_obs), 2);
  const double n = static_cast<double>(n_obs);
  for (Eigen::Index j = 0; j < p.rows(); ++j) {
    p(j, 0) = static_cast<double>(j + 1) / n;
    p(j, 1) = 1.0 - p(j, 0);
  }
  return ConcentrationMatrix(std::move(p));
}

GramianSummary build_gramian(const ConcentrationMatrix& p) {
  const auto& v = p.values();
  const Eigen::Index m = v.cols();
  GramianSummary g;
  g.gamma = Eigen::MatrixXd::Zero(m, m);
  // Sequential accumulation in row order keeps the result reproducible.
  for (Eigen::Index l = 0; l < m; ++l) {
    for (Eigen::Index k = l; k < m; ++k) {
      double s = 0.0;
      for (Eigen::Index j = 0; j < v.rows(); ++j) s += v(j, l) * v(j, k);
      g.gamma(l, k) = g.gamma(k, l) = s / static_cast<double>(v.rows());
    }
  }
  g.det_gamma = determinant(g.gamma);
  g.minors.resize(m, m);
  for (Eigen::Index l = 0; l < m; ++l) {
    for (Eigen::Index k = 0; k < m; ++k) g.minors(l, k) = determinant(without(g.gamma, l, k));
  }
  return g;
}

WeightMatrix compute_weights(const ConcentrationMatrix& p, const GramianSummary& g,
                             double det_tol) {
  if (!(g.det_gamma > det_tol)) throw SingularGramian(g.det_gamma, det_tol);
  const Eigen::Index m_count = g.gamma.rows();
  // coef(m, k) = (-1)^{k+m} minor(m,k) / det, i.e. the inverse Gramian.
  Eigen::MatrixXd coef(m_count, m_count);
  for (Eigen::Index m = 0; m < m_count; ++m) {
    for (Eigen::Index k = 0; k < m_count; ++k) {
      const double sign = ((m + k) % 2 == 0) ? 1.0 : -1.0;
      coef(m, k) = sign * g.minors(m, k) / g.det_gamma;
    }
  }
  WeightMatrix a;
  a.values = p.values() * coef.transpose();
  return a;
}

Eigen::MatrixXd weight_co_moments(const WeightMatrix& a, const ConcentrationMatrix& p,
                                  std::size_t m) {
  const auto& pv = p.values();
  const Eigen::Index mc = pv.cols();
  const auto col = a.values.col(static_cast<Eigen::Index>(m));
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(mc, mc);
  for (Eigen::Index s = 0; s < mc; ++s) {
    for (Eigen::Index q = s; q < mc; ++q) {
      double acc = 0.0;
      for (Eigen::Index j = 0; j < pv.rows(); ++j) acc += col(j) * col(j) * pv(j, s) * pv(j, q);
      out(s, q) = out(q, s) = acc / static_cast<double>(pv.rows());
    }
  }
  return out;
}

Eigen::MatrixXd biorthogonality_matrix(const WeightMatrix& a, const ConcentrationMatrix& p) {
  return a.values.transpose() * p.values() / static_cast<double>(p.n_obs());
}

}  // namespace mvcreg
