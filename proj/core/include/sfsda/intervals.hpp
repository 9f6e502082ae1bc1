#pragma once

#include <utility>
#include <vector>

namespace sfsda {

/// Closed interval [lo, hi] on the real line.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double length() const { return hi - lo; }
  bool contains(double z, double tol = 0.0) const {
    return z >= lo - tol && z <= hi + tol;
  }
};

/// Union of disjoint, sorted closed intervals. This is the truncation
/// region of the test statistic: the set of values z for which the
/// selection pipeline reproduces the observed outcome.
struct TruncationRegion {
  std::vector<Interval> intervals;

  bool empty() const { return intervals.empty(); }
  double total_length() const;
  bool contains(double z, double tol = 0.0) const;
};

/// Sorts, drops empty intervals, and merges overlaps and gaps <= merge_gap.
TruncationRegion normalize_region(std::vector<Interval> intervals,
                                  double merge_gap = 0.0);

/// Intersection of two normalized regions.
TruncationRegion intersect_regions(const TruncationRegion& a,
                                   const TruncationRegion& b);

/// Intersection with a single interval.
TruncationRegion clip_region(const TruncationRegion& region, Interval window);

/// Total length of the symmetric difference between two normalized regions.
double symmetric_difference_length(const TruncationRegion& a,
                                   const TruncationRegion& b);

}  // namespace sfsda
