#pragma once

#include <Eigen/Dense>

#include <vector>

#include "sfsda/intervals.hpp"
#include "sfsda/line.hpp"

namespace sfsda {

/// l1 and (optional) l2 penalty weights. l2_weight = 0 is the pure Lasso.
struct PenaltyConfig {
  double l1_weight = 0.0;
  double l2_weight = 0.0;

  void validate() const;
};

/// Support and signs of a fitted coefficient vector.
struct SelectionPattern {
  std::vector<int> active_set;  // strictly increasing feature indices
  std::vector<int> signs;       // +-1, aligned with active_set

  bool same_active_set(const std::vector<int>& other) const {
    return active_set == other;
  }
  bool operator==(const SelectionPattern& other) const = default;
};

struct FitResult {
  Eigen::VectorXd coefficients;
  SelectionPattern pattern;
  double kkt_residual = 0.0;
  /// Set when the solution may be non-unique: duplicate active columns with
  /// no ridge term.
  bool non_unique_warning = false;
};

/// Minimizes 0.5 ||y - X beta||^2 + l1 |beta|_1 + 0.5 l2 |beta|^2 by cyclic
/// coordinate descent (exact soft-threshold updates on the Gram matrix).
/// Coefficients below 1e-10 in magnitude are snapped to zero before the
/// pattern is extracted, so the pattern and the KKT inequalities agree.
/// Throws NumericError with the final residual if the KKT residual still
/// exceeds 1e-6 after the sweep cap.
FitResult fit(const Eigen::MatrixXd& design, const Eigen::VectorXd& response,
              const PenaltyConfig& penalty);

/// Interval of z on which refitting at transform * (anchor + direction z)
/// keeps the given active set and signs. Assembled from the stationarity
/// (sign) conditions and the subgradient band of the inactive features; all
/// are affine in z, so the region is one interval. `design` is the
/// pre-transport feature stack; the fitted design is transform * design.
/// Requires l1_weight > 0.
Interval selection_region(const Eigen::MatrixXd& design,
                          const Eigen::MatrixXd& transform,
                          const LineParametrization& line,
                          const SelectionPattern& pattern,
                          const PenaltyConfig& penalty, double z_current);

}  // namespace sfsda
