#include "sfsda/sparse_regression.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sfsda/errors.hpp"

namespace sfsda {

void PenaltyConfig::validate() const {
  if (l1_weight < 0.0 || l2_weight < 0.0) {
    throw InputError("penalty weights must be nonnegative");
  }
}

namespace {

constexpr double kZeroCoefficient = 1e-10;  // support-extraction threshold
constexpr double kSweepTol = 1e-12;         // max coefficient change per sweep
constexpr int kMaxSweeps = 100000;
constexpr double kKktTol = 1e-6;

double soft_threshold(double value, double threshold) {
  if (value > threshold) return value - threshold;
  if (value < -threshold) return value + threshold;
  return 0.0;
}

}  // namespace

FitResult fit(const Eigen::MatrixXd& design, const Eigen::VectorXd& response,
              const PenaltyConfig& penalty) {
  penalty.validate();
  if (design.rows() != response.size()) {
    throw InputError("fit: design rows and response length differ");
  }
  const Eigen::Index p = design.cols();
  const double l1 = penalty.l1_weight;
  const double l2 = penalty.l2_weight;

  const Eigen::MatrixXd gram = design.transpose() * design;
  const Eigen::VectorXd xty = design.transpose() * response;

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd gram_beta = Eigen::VectorXd::Zero(p);
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    double max_change = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) {
      const double denom = gram(j, j) + l2;
      if (denom <= 0.0) continue;  // identically-zero column stays at zero
      const double rho = xty(j) - gram_beta(j) + gram(j, j) * beta(j);
      const double updated = soft_threshold(rho, l1) / denom;
      const double change = updated - beta(j);
      if (change != 0.0) {
        gram_beta += gram.col(j) * change;
        beta(j) = updated;
        max_change = std::max(max_change, std::abs(change));
      }
    }
    if (max_change <= kSweepTol) break;
  }

  FitResult result;
  for (Eigen::Index j = 0; j < p; ++j) {
    if (std::abs(beta(j)) <= kZeroCoefficient) beta(j) = 0.0;
  }
  result.coefficients = beta;
  for (Eigen::Index j = 0; j < p; ++j) {
    if (beta(j) != 0.0) {
      result.pattern.active_set.push_back(static_cast<int>(j));
      result.pattern.signs.push_back(beta(j) > 0.0 ? 1 : -1);
    }
  }

  const Eigen::VectorXd residual_vec = response - design * beta;
  const Eigen::VectorXd grad = design.transpose() * residual_vec;
  double kkt = 0.0;
  for (Eigen::Index j = 0; j < p; ++j) {
    if (beta(j) != 0.0) {
      const double sign = beta(j) > 0.0 ? 1.0 : -1.0;
      kkt = std::max(kkt, std::abs(grad(j) - l2 * beta(j) - l1 * sign));
    } else {
      kkt = std::max(kkt, std::abs(grad(j)) - l1);
    }
  }
  result.kkt_residual = std::max(kkt, 0.0);
  if (result.kkt_residual > kKktTol) {
    throw NumericError("fit did not reach stationarity: KKT residual " +
                       std::to_string(result.kkt_residual));
  }

  if (l2 == 0.0) {
    const auto& active = result.pattern.active_set;
    for (std::size_t a = 0; a < active.size() && !result.non_unique_warning;
         ++a) {
      for (std::size_t b = a + 1; b < active.size(); ++b) {
        if ((design.col(active[a]) - design.col(active[b]))
                .lpNorm<Eigen::Infinity>() <= 1e-12) {
          result.non_unique_warning = true;
          break;
        }
      }
    }
  }
  return result;
}

Interval selection_region(const Eigen::MatrixXd& design,
                          const Eigen::MatrixXd& transform,
                          const LineParametrization& line,
                          const SelectionPattern& pattern,
                          const PenaltyConfig& penalty, double z_current) {
  penalty.validate();
  const double l1 = penalty.l1_weight;
  const double l2 = penalty.l2_weight;
  if (!(l1 > 0.0)) {
    throw InputError(
        "selection_region requires a positive l1 weight (the dual band "
        "degenerates at l1 = 0)");
  }
  const Eigen::Index p = design.cols();
  const Eigen::Index m = static_cast<Eigen::Index>(pattern.active_set.size());

  const Eigen::MatrixXd fitted_design = transform * design;
  const Eigen::VectorXd anchor_t = transform * line.anchor;
  const Eigen::VectorXd direction_t = transform * line.direction;

  std::vector<char> is_active(static_cast<std::size_t>(p), 0);
  for (int j : pattern.active_set) is_active[static_cast<std::size_t>(j)] = 1;

  // Constraint rows psi * z <= phi, accumulated across the sign conditions
  // and both sides of the subgradient band.
  std::vector<double> psi;
  std::vector<double> phi;

  Eigen::VectorXd residual_a = anchor_t;   // (I - X_M K) applied to anchor
  Eigen::VectorXd residual_b = direction_t;
  Eigen::VectorXd dual_offset = Eigen::VectorXd::Zero(p);  // X' (X_M')^+ S

  if (m > 0) {
    Eigen::MatrixXd active_design(fitted_design.rows(), m);
    Eigen::VectorXd sign_vec(m);
    for (Eigen::Index idx = 0; idx < m; ++idx) {
      active_design.col(idx) =
          fitted_design.col(pattern.active_set[static_cast<std::size_t>(idx)]);
      sign_vec(idx) =
          static_cast<double>(pattern.signs[static_cast<std::size_t>(idx)]);
    }
    Eigen::MatrixXd gram_reg = active_design.transpose() * active_design;
    gram_reg.diagonal().array() += l2;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(gram_reg);
    if (!lu.isInvertible()) {
      throw NumericError(
          "selection_region: singular active-set Gram matrix (ill-posed "
          "active set)");
    }

    const Eigen::VectorXd coef_a = lu.solve(active_design.transpose() * anchor_t);
    const Eigen::VectorXd coef_b =
        lu.solve(active_design.transpose() * direction_t);
    const Eigen::VectorXd gram_inv_sign = lu.solve(sign_vec);

    // Sign conditions: S o beta_M(z) > 0, i.e.
    // S o K y(z) > l1 * S o (G^-1 S).
    for (Eigen::Index idx = 0; idx < m; ++idx) {
      const double s = sign_vec(idx);
      const double lhs_slope = s * coef_b(idx);
      const double lhs_const = s * coef_a(idx) - l1 * s * gram_inv_sign(idx);
      psi.push_back(-lhs_slope);
      phi.push_back(lhs_const);
    }

    residual_a -= active_design * coef_a;
    residual_b -= active_design * coef_b;
    const Eigen::VectorXd carrier = active_design * gram_inv_sign;
    dual_offset = fitted_design.transpose() * carrier;
  }

  // Subgradient band for inactive features: -1 < S_j(z) < 1 with
  // S_j(z) = dual_offset_j + (1/l1) x_j' (I - P) y(z).
  const Eigen::VectorXd band_a = fitted_design.transpose() * residual_a / l1;
  const Eigen::VectorXd band_b = fitted_design.transpose() * residual_b / l1;
  for (Eigen::Index j = 0; j < p; ++j) {
    if (is_active[static_cast<std::size_t>(j)]) continue;
    const double slope = band_b(j);
    const double offset = dual_offset(j) + band_a(j);
    psi.push_back(slope);
    phi.push_back(1.0 - offset);
    psi.push_back(-slope);
    phi.push_back(1.0 + offset);
  }

  double psi_scale = 0.0;
  for (double v : psi) psi_scale = std::max(psi_scale, std::abs(v));
  const double slope_tol = 1e-12 * std::max(1.0, psi_scale);

  double lo = line.z_min();
  double hi = line.z_max();
  for (std::size_t row = 0; row < psi.size(); ++row) {
    if (psi[row] > slope_tol) {
      hi = std::min(hi, phi[row] / psi[row]);
    } else if (psi[row] < -slope_tol) {
      lo = std::max(lo, phi[row] / psi[row]);
    } else if (phi[row] < -1e-9) {
      lo = hi = z_current;  // constant infeasible row: degenerate pattern
    }
  }

  lo = std::min(lo, z_current);
  hi = std::max(hi, z_current);
  return {lo, hi};
}

}  // namespace sfsda
