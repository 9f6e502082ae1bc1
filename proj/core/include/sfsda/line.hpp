#pragma once

#include <Eigen/Dense>

#include <cmath>

namespace sfsda {

/// One-dimensional slice of the response space obtained by conditioning on
/// the nuisance component: the stacked response is anchor + direction * z,
/// and the test statistic Z is N(0, statistic_sd^2) under the null.
struct LineParametrization {
  Eigen::VectorXd anchor;       // nuisance part, orthogonal to eta in the
                                // covariance metric
  Eigen::VectorXd direction;    // Sigma eta / (eta' Sigma eta)
  Eigen::VectorXd eta;          // test-statistic direction
  double statistic_sd = 1.0;    // sqrt(eta' Sigma eta)
  double observed_statistic = 0.0;

  Eigen::VectorXd response_at(double z) const {
    return anchor + direction * z;
  }

  // Sweep range: +-20 sd covers all but ~1e-89 of the null mass. The range
  // is widened in the rare case the observed statistic falls outside it,
  // so the observed selection always lies inside the searched window.
  double half_range() const {
    return std::max(20.0 * statistic_sd,
                    std::abs(observed_statistic) + statistic_sd);
  }
  double z_min() const { return -half_range(); }
  double z_max() const { return half_range(); }
};

}  // namespace sfsda
