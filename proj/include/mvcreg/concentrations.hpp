#pragma once

#include <Eigen/Dense>
#include <cstddef>

namespace mvcreg {

inline constexpr double kDefaultDetTol = 1e-8;
inline constexpr double kRowSumTol = 1e-9;

// Known mixing probabilities: row j holds the probabilities that observation
// j belongs to each of the M components.
class ConcentrationMatrix {
 public:
  // Throws InvalidInput unless every entry lies in [0,1], every row sums to
  // one within `row_sum_tol` and N >= M. Rows are never renormalized.
  explicit ConcentrationMatrix(Eigen::MatrixXd values, double row_sum_tol = kRowSumTol);

  const Eigen::MatrixXd& values() const noexcept { return values_; }
  std::size_t n_obs() const noexcept { return static_cast<std::size_t>(values_.rows()); }
  std::size_t n_components() const noexcept { return static_cast<std::size_t>(values_.cols()); }

  // p^1_j = j/N, p^2_j = 1 - j/N for j = 1..N.
  static ConcentrationMatrix linear_ramp(std::size_t n_obs);

 private:
  Eigen::MatrixXd values_;
};

struct GramianSummary {
  Eigen::MatrixXd gamma;  // (1/N) p^T p
  double det_gamma = 0.0;
  Eigen::MatrixXd minors;  // minors(l, m): det of gamma without row l, column m
};

// Weight matrix; column m holds the weights estimating component m.
struct WeightMatrix {
  Eigen::MatrixXd values;
};

GramianSummary build_gramian(const ConcentrationMatrix& p);

// Minimax weights a^m_j = (1/det) sum_k (-1)^{k+m} minor(m,k) p^k_j.
// Throws SingularGramian when det(Gamma_N) <= det_tol.
WeightMatrix compute_weights(const ConcentrationMatrix& p, const GramianSummary& g,
                             double det_tol = kDefaultDetTol);

// Matrix with (s,q) entry (1/N) sum_j (a^m_j)^2 p^s_j p^q_j. `m` is 0-based.
Eigen::MatrixXd weight_co_moments(const WeightMatrix& a, const ConcentrationMatrix& p,
                                  std::size_t m);

// (1/N) sum_j a^m_j p^k_j for all m, k. Equals the identity for valid weights.
Eigen::MatrixXd biorthogonality_matrix(const WeightMatrix& a, const ConcentrationMatrix& p);

}  // namespace mvcreg
