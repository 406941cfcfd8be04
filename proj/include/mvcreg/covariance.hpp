#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <vector>

#include "mvcreg/asymptotic.hpp"
#include "mvcreg/concentrations.hpp"
#include "mvcreg/estimator.hpp"
#include "mvcreg/moments.hpp"

namespace mvcreg {

// Asymptotic covariance of component m's estimator from population moments.
// `co_moments` is the M x M matrix of <(a^m)^2 p^s p^q>; its row sums give
// <(a^m)^2 p^s>. Throws SingularD when moments[m].d2 is singular.
AsymptoticCovariance analytic_sigma(const std::vector<ComponentMoments>& moments,
                                    const Eigen::MatrixXd& co_moments, std::size_t m);

// Same assembly with every population quantity replaced by its weighted
// empirical estimate: D and L from weights a^s, sigma^2 from the a^s-weighted
// mean squared residual of the fitted b^(s), co-moments at finite N.
// Requires every component of `fit` to have succeeded.
AsymptoticCovariance plug_in_covariance(const Dataset& data, const ConcentrationMatrix& p,
                                        const WeightMatrix& a, const FitResult& fit, std::size_t m);
AsymptoticCovariance plug_in_covariance(const Dataset& data, const ConcentrationMatrix& p,
                                        const FitResult& fit, std::size_t m);

// Empirical ComponentMoments for every component (sigma2 not clamped).
std::vector<ComponentMoments> plug_in_moments(const Dataset& data, const WeightMatrix& a,
                                              const FitResult& fit);

// Fills fit.plug_in_cov for every component; no-op unless all fits succeeded.
void attach_plug_in_covariance(FitResult& fit, const Dataset& data, const ConcentrationMatrix& p,
                               const WeightMatrix& a);

}  // namespace mvcreg
