#pragma once

#include <cstdint>
#include <vector>

#include "sfsda/dataset.hpp"
#include "sfsda/line.hpp"
#include "sfsda/sparse_regression.hpp"

namespace sfsda {

/// Classical two-sided p-value that ignores the selection event.
double naive_p(const LineParametrization& line);

/// Bonferroni correction over all 2^p candidate feature sets, capped at 1.
double bonferroni_p(double naive, int p_features);

struct DataSplitFeature {
  int feature = 0;
  double statistic = 0.0;
  double sigma = 0.0;
  double p_value = 1.0;
  bool skipped = false;  // inference-half design singular on this feature
};

/// Data splitting: selection (transport + fit) on one half of each domain,
/// classical known-variance least-squares p-values for the selected
/// features on the held-out target half. The inference half never enters
/// the selection phase.
std::vector<DataSplitFeature> data_split_p(const TwoDomainDataset& dataset,
                                           const PenaltyConfig& penalty,
                                           std::uint64_t seed);

}  // namespace sfsda
