#pragma once

#include "sfsda/intervals.hpp"

namespace sfsda {

/// Upper tail P(Z > x) of the standard normal.
double normal_sf(double x);

/// CDF of the standard normal.
double normal_cdf(double x);

/// log P(Z > x), stable for large x (asymptotic expansion past the range
/// where erfc stays normal).
double log_normal_sf(double x);

/// log P(lo <= Z <= hi) for a standard normal, computed as a difference of
/// complementary CDFs in log space so that far-tail intervals do not cancel.
/// Requires lo < hi; returns -inf when the mass underflows entirely.
double log_normal_interval_mass(double lo, double hi);

/// log of the N(0, sd^2) mass of a region (sum over intervals, log-sum-exp).
double log_region_mass(const TruncationRegion& region, double sd);

}  // namespace sfsda
