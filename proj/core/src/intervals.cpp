#include "sfsda/intervals.hpp"

#include <algorithm>
#include <cmath>

namespace sfsda {

double TruncationRegion::total_length() const {
  double total = 0.0;
  for (const auto& iv : intervals) total += iv.length();
  return total;
}

bool TruncationRegion::contains(double z, double tol) const {
  for (const auto& iv : intervals) {
    if (iv.contains(z, tol)) return true;
  }
  return false;
}

TruncationRegion normalize_region(std::vector<Interval> intervals,
                                  double merge_gap) {
  std::erase_if(intervals, [](const Interval& iv) { return !(iv.lo < iv.hi); });
  std::sort(intervals.begin(), intervals.end(),
            [](const Interval& a, const Interval& b) {
              return a.lo < b.lo || (a.lo == b.lo && a.hi < b.hi);
            });
  TruncationRegion out;
  for (const auto& iv : intervals) {
    if (!out.intervals.empty() && iv.lo <= out.intervals.back().hi + merge_gap) {
      out.intervals.back().hi = std::max(out.intervals.back().hi, iv.hi);
    } else {
      out.intervals.push_back(iv);
    }
  }
  return out;
}

TruncationRegion intersect_regions(const TruncationRegion& a,
                                   const TruncationRegion& b) {
  TruncationRegion out;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < a.intervals.size() && j < b.intervals.size()) {
    const Interval& x = a.intervals[i];
    const Interval& y = b.intervals[j];
    double lo = std::max(x.lo, y.lo);
    double hi = std::min(x.hi, y.hi);
    if (lo < hi) out.intervals.push_back({lo, hi});
    if (x.hi < y.hi) {
      ++i;
    } else {
      ++j;
    }
  }
  return out;
}

TruncationRegion clip_region(const TruncationRegion& region, Interval window) {
  TruncationRegion win;
  win.intervals.push_back(window);
  return intersect_regions(region, win);
}

double symmetric_difference_length(const TruncationRegion& a,
                                   const TruncationRegion& b) {
  // Sweep over all endpoints; between consecutive endpoints membership in
  // each region is constant.
  std::vector<double> cuts;
  for (const auto& iv : a.intervals) {
    cuts.push_back(iv.lo);
    cuts.push_back(iv.hi);
  }
  for (const auto& iv : b.intervals) {
    cuts.push_back(iv.lo);
    cuts.push_back(iv.hi);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    double mid = 0.5 * (cuts[k] + cuts[k + 1]);
    if (a.contains(mid) != b.contains(mid)) total += cuts[k + 1] - cuts[k];
  }
  return total;
}

}  // namespace sfsda
