#pragma once

#include <Eigen/Dense>

#include <vector>

#include "sfsda/dataset.hpp"
#include "sfsda/intervals.hpp"
#include "sfsda/line.hpp"
#include "sfsda/sparse_regression.hpp"

namespace sfsda {

/// One sub-problem of the divide-and-conquer sweep: within transport region
/// u, the v-th selection interval, with the pattern fitted there.
struct SubProblemRecord {
  int transport_index = 0;
  int selection_index = 0;
  Interval interval;
  SelectionPattern pattern;
  bool matches_observed = false;
};

struct DivideAndConquerResult {
  std::vector<SubProblemRecord> records;
  TruncationRegion region;  // union over records matching the observed set
};

/// Per-feature output of the selective pipeline.
struct FeatureReport {
  int feature = 0;
  double statistic = 0.0;    // observed test statistic
  double sigma = 0.0;        // its null standard deviation
  TruncationRegion region;
  double p_selective = 1.0;
  int subproblem_count = 0;  // intervals encountered along the sweep
};

/// Direction of the target-only least-squares test statistic for `feature`
/// (which must belong to active_set): zero on the source block,
/// X^t_M (X^t_M' X^t_M)^-1 e_j on the target block.
Eigen::VectorXd build_eta(const TwoDomainDataset& dataset,
                          const std::vector<int>& active_set, int feature);

/// Conditions on the nuisance component: splits the observed stacked
/// response into anchor + direction * Z_obs with eta' direction = 1 and
/// eta' anchor = 0 in exact arithmetic.
LineParametrization decompose_line(const TwoDomainDataset& dataset,
                                   const Eigen::VectorXd& eta);

/// Sweeps the line once, tiling [z_min, z_max] with transport-basis
/// intervals subdivided by selection intervals, and collects the union of
/// the intervals whose active set equals observed_active (signs are
/// marginalized by the union).
DivideAndConquerResult divide_and_conquer(const TwoDomainDataset& dataset,
                                          const LineParametrization& line,
                                          const PenaltyConfig& penalty,
                                          const std::vector<int>& observed_active);

/// P(|Z| >= |Z_obs| | Z in region) for Z ~ N(0, sd^2), evaluated with
/// log-space tail differences. Throws NumericError when the region mass
/// falls below 1e-300.
double truncated_two_sided_p(const LineParametrization& line,
                             const TruncationRegion& region);

/// Full selective pipeline: transport + fit on the observed data, then one
/// report per selected feature. Features are independent; with threads > 1
/// they are processed concurrently and the report order stays fixed.
std::vector<FeatureReport> sfs_da(const TwoDomainDataset& dataset,
                                  const PenaltyConfig& penalty,
                                  int threads = 1);

/// Over-conditioning variant: the region is the single observed sub-problem
/// interval (observed transport basis intersected with the observed
/// selection-and-sign polyhedron); no sweep.
std::vector<FeatureReport> sfs_da_oc(const TwoDomainDataset& dataset,
                                     const PenaltyConfig& penalty,
                                     int threads = 1);

}  // namespace sfsda
