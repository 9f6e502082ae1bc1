#include "sfsda/normal.hpp"

#include <cmath>
#include <limits>

namespace sfsda {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440084436210485;
constexpr double kLogHalf = -0.69314718055994530941723212145818;
constexpr double kHalfLog2Pi = 0.91893853320467274178032973640562;

// log(1 - exp(t)) for t < 0.
double log1mexp(double t) {
  if (t >= 0.0) return -std::numeric_limits<double>::infinity();
  if (t < -0.693147180559945309) return std::log1p(-std::exp(t));
  return std::log(-std::expm1(t));
}

double logsumexp2(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  double m = a > b ? a : b;
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

}  // namespace

double normal_sf(double x) { return 0.5 * std::erfc(x * kInvSqrt2); }

double normal_cdf(double x) { return 0.5 * std::erfc(-x * kInvSqrt2); }

double log_normal_sf(double x) {
  if (x < 30.0) {
    // erfc stays comfortably inside normal range here (underflows near 37.5
    // in the transformed argument, i.e. x ~ 53).
    return kLogHalf + std::log(std::erfc(x * kInvSqrt2));
  }
  // Asymptotic: sf(x) = phi(x)/x * (1 - 1/x^2 + 3/x^4 - 15/x^6 + ...).
  double inv2 = 1.0 / (x * x);
  double series = -inv2 * (1.0 - inv2 * (3.0 - 15.0 * inv2));
  return -0.5 * x * x - kHalfLog2Pi - std::log(x) + std::log1p(series);
}

double log_normal_interval_mass(double lo, double hi) {
  if (!(lo < hi)) return -std::numeric_limits<double>::infinity();
  if (hi <= 0.0) return log_normal_interval_mass(-hi, -lo);
  if (lo < 0.0) {
    // Split at the mode; each half is a clean tail difference.
    return logsumexp2(log_normal_interval_mass(lo, 0.0),
                      log_normal_interval_mass(0.0, hi));
  }
  double la = log_normal_sf(lo);
  double lb = log_normal_sf(hi);
  return la + log1mexp(lb - la);
}

double log_region_mass(const TruncationRegion& region, double sd) {
  double acc = -std::numeric_limits<double>::infinity();
  for (const auto& iv : region.intervals) {
    acc = logsumexp2(acc, log_normal_interval_mass(iv.lo / sd, iv.hi / sd));
  }
  return acc;
}

}  // namespace sfsda
