#include "sfsda/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sfsda/errors.hpp"
#include "sfsda/normal.hpp"
#include "sfsda/rng.hpp"
#include "sfsda/transport.hpp"
#include "sfsda/inference.hpp"

namespace sfsda {

double naive_p(const LineParametrization& line) {
  if (!(line.statistic_sd > 0.0)) {
    throw NumericError("naive_p: nonpositive statistic sd");
  }
  const double z = std::abs(line.observed_statistic) / line.statistic_sd;
  return std::min(1.0, 2.0 * normal_sf(z));
}

double bonferroni_p(double naive, int p_features) {
  if (naive < 0.0 || naive > 1.0) {
    throw InputError("bonferroni_p: naive p-value outside [0,1]");
  }
  if (p_features >= 63) return naive > 0.0 ? 1.0 : 0.0;
  const double factor = std::ldexp(1.0, p_features);  // 2^p
  return std::min(1.0, factor * naive);
}

namespace {

// Seeded 50/50 split of [0, n): first ceil(n/2) shuffled indices select,
// the rest infer.
void split_indices(Eigen::Index n, CounterRng& rng,
                   std::vector<Eigen::Index>& selection,
                   std::vector<Eigen::Index>& inference) {
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  for (Eigen::Index i = n - 1; i > 0; --i) {
    const auto j = static_cast<Eigen::Index>(
        rng.uniform_below(static_cast<std::uint64_t>(i + 1)));
    std::swap(order[static_cast<std::size_t>(i)],
              order[static_cast<std::size_t>(j)]);
  }
  const Eigen::Index half = (n + 1) / 2;
  selection.assign(order.begin(), order.begin() + half);
  inference.assign(order.begin() + half, order.end());
  std::sort(selection.begin(), selection.end());
  std::sort(inference.begin(), inference.end());
}

Eigen::MatrixXd take_rows(const Eigen::MatrixXd& m,
                          const std::vector<Eigen::Index>& rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = m.row(rows[i]);
  }
  return out;
}

Eigen::VectorXd take_entries(const Eigen::VectorXd& v,
                             const std::vector<Eigen::Index>& rows) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out(static_cast<Eigen::Index>(i)) = v(rows[i]);
  }
  return out;
}

Eigen::MatrixXd take_submatrix(const Eigen::MatrixXd& m,
                               const std::vector<Eigen::Index>& rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows.size(); ++j) {
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          m(rows[i], rows[j]);
    }
  }
  return out;
}

}  // namespace

std::vector<DataSplitFeature> data_split_p(const TwoDomainDataset& dataset,
                                           const PenaltyConfig& penalty,
                                           std::uint64_t seed) {
  if (dataset.n_source() < 2 || dataset.n_target() < 2) {
    throw InputError("data_split_p requires n_s >= 2 and n_t >= 2");
  }
  CounterRng rng(mix_seed(seed, 0x6473u));  // "ds"

  std::vector<Eigen::Index> src_sel, src_inf, tgt_sel, tgt_inf;
  split_indices(dataset.n_source(), rng, src_sel, src_inf);
  split_indices(dataset.n_target(), rng, tgt_sel, tgt_inf);

  // Selection phase sees only the first halves.
  TwoDomainDataset selection_half;
  selection_half.source_features = take_rows(dataset.source_features, src_sel);
  selection_half.source_response =
      take_entries(dataset.source_response, src_sel);
  selection_half.target_features = take_rows(dataset.target_features, tgt_sel);
  selection_half.target_response =
      take_entries(dataset.target_response, tgt_sel);
  selection_half.source_cov = take_submatrix(dataset.source_cov, src_sel);
  selection_half.target_cov = take_submatrix(dataset.target_cov, tgt_sel);

  const TransportProblem problem = build_problem(selection_half);
  const TransportSolution solution =
      solve_transport(problem, selection_half.stacked_response());
  const auto [design, transform] = apply_transport(solution, selection_half);
  const FitResult fit_result =
      fit(design, transform * selection_half.stacked_response(), penalty);

  // Inference phase: known-variance least squares on the held-out target
  // half, restricted to the selected features.
  const Eigen::MatrixXd x_inf = take_rows(dataset.target_features, tgt_inf);
  const Eigen::VectorXd y_inf = take_entries(dataset.target_response, tgt_inf);
  const Eigen::MatrixXd cov_inf = take_submatrix(dataset.target_cov, tgt_inf);

  std::vector<DataSplitFeature> out;
  const auto& active = fit_result.pattern.active_set;
  const Eigen::Index m = static_cast<Eigen::Index>(active.size());
  if (m == 0) return out;

  Eigen::MatrixXd x_active(x_inf.rows(), m);
  for (Eigen::Index idx = 0; idx < m; ++idx) {
    x_active.col(idx) = x_inf.col(active[static_cast<std::size_t>(idx)]);
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(x_active.transpose() * x_active);
  const bool invertible = lu.isInvertible();
  Eigen::MatrixXd coef_map;  // (X'X)^-1 X'
  Eigen::VectorXd estimates;
  if (invertible) {
    coef_map = lu.solve(x_active.transpose());
    estimates = coef_map * y_inf;
  }

  for (Eigen::Index idx = 0; idx < m; ++idx) {
    DataSplitFeature feat;
    feat.feature = active[static_cast<std::size_t>(idx)];
    if (!invertible) {
      feat.skipped = true;
      out.push_back(feat);
      continue;
    }
    const Eigen::VectorXd weight = coef_map.row(idx).transpose();
    const double variance = weight.dot(cov_inf * weight);
    if (!(variance > 0.0)) {
      feat.skipped = true;
      out.push_back(feat);
      continue;
    }
    feat.statistic = estimates(idx);
    feat.sigma = std::sqrt(variance);
    feat.p_value =
        std::min(1.0, 2.0 * normal_sf(std::abs(feat.statistic) / feat.sigma));
    out.push_back(feat);
  }
  return out;
}

}  // namespace sfsda
