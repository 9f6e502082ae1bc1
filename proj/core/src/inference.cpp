#include "sfsda/inference.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <string>
#include <thread>

#include "sfsda/errors.hpp"
#include "sfsda/normal.hpp"
#include "sfsda/transport.hpp"

namespace sfsda {

Eigen::VectorXd build_eta(const TwoDomainDataset& dataset,
                          const std::vector<int>& active_set, int feature) {
  const Eigen::Index ns = dataset.n_source();
  const Eigen::Index nt = dataset.n_target();
  const Eigen::Index m = static_cast<Eigen::Index>(active_set.size());

  Eigen::Index position = -1;
  for (Eigen::Index idx = 0; idx < m; ++idx) {
    if (active_set[static_cast<std::size_t>(idx)] == feature) position = idx;
  }
  if (position < 0) {
    throw InputError("build_eta: feature is not in the active set");
  }

  Eigen::MatrixXd target_active(nt, m);
  for (Eigen::Index idx = 0; idx < m; ++idx) {
    target_active.col(idx) =
        dataset.target_features.col(active_set[static_cast<std::size_t>(idx)]);
  }
  Eigen::MatrixXd gram = target_active.transpose() * target_active;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(gram);
  if (!lu.isInvertible()) {
    throw NumericError(
        "build_eta: target design restricted to the active set is rank "
        "deficient");
  }
  Eigen::VectorXd unit = Eigen::VectorXd::Zero(m);
  unit(position) = 1.0;

  Eigen::VectorXd eta = Eigen::VectorXd::Zero(ns + nt);
  eta.tail(nt) = target_active * lu.solve(unit);
  return eta;
}

LineParametrization decompose_line(const TwoDomainDataset& dataset,
                                   const Eigen::VectorXd& eta) {
  const Eigen::Index ns = dataset.n_source();
  const Eigen::Index nt = dataset.n_target();
  if (eta.size() != ns + nt) {
    throw InputError("decompose_line: eta has wrong length");
  }
  Eigen::VectorXd sigma_eta(ns + nt);
  sigma_eta.head(ns) = dataset.source_cov * eta.head(ns);
  sigma_eta.tail(nt) = dataset.target_cov * eta.tail(nt);
  const double variance = eta.dot(sigma_eta);
  if (!(variance > 0.0)) {
    throw NumericError("decompose_line: test statistic has no variance");
  }

  const Eigen::VectorXd observed = dataset.stacked_response();

  LineParametrization line;
  line.eta = eta;
  line.direction = sigma_eta / variance;
  line.statistic_sd = std::sqrt(variance);
  line.observed_statistic = eta.dot(observed);
  line.anchor = observed - line.direction * line.observed_statistic;
  return line;
}

namespace {

// Numeric nudge past an interval's right endpoint, so each refit happens in
// the interior of the next sub-problem rather than on a boundary where KKT
// and basis conditions are ambiguous.
double sweep_delta(const LineParametrization& line) {
  return 1e-6 * line.statistic_sd;
}

constexpr int kMaxConsecutiveTiny = 1000;
constexpr std::size_t kMaxRecords = 2000000;

}  // namespace

DivideAndConquerResult divide_and_conquer(
    const TwoDomainDataset& dataset, const LineParametrization& line,
    const PenaltyConfig& penalty, const std::vector<int>& observed_active) {
  const TransportProblem problem = build_problem(dataset);
  const Eigen::MatrixXd feature_stack = dataset.stacked_features();
  const double z_lo = line.z_min();
  const double z_hi = line.z_max();
  const double delta = sweep_delta(line);

  DivideAndConquerResult out;
  std::vector<Interval> matching;
  int consecutive_tiny = 0;

  double z = z_lo;
  int transport_index = 0;
  while (z < z_hi) {
    ++transport_index;
    const Eigen::VectorXd response = line.response_at(z);
    const TransportSolution solution = solve_transport(problem, response);
    Interval basis_window = basis_region(problem, solution, line, z);
    basis_window.hi = std::min(basis_window.hi, z_hi);

    const auto [design, transform] = apply_transport(solution, dataset);

    double z_inner = z;
    int selection_index = 0;
    while (true) {
      ++selection_index;
      const Eigen::VectorXd fitted_response =
          transform * line.response_at(z_inner);
      const FitResult fit_result = fit(design, fitted_response, penalty);
      const Interval selection_window =
          selection_region(feature_stack, transform, line, fit_result.pattern,
                           penalty, z_inner);

      SubProblemRecord record;
      record.transport_index = transport_index;
      record.selection_index = selection_index;
      record.interval = {std::max(basis_window.lo, selection_window.lo),
                         std::min(basis_window.hi, selection_window.hi)};
      record.interval.lo = std::min(record.interval.lo, z_inner);
      record.interval.hi = std::max(record.interval.hi, z_inner);
      record.pattern = fit_result.pattern;
      record.matches_observed =
          fit_result.pattern.same_active_set(observed_active);
      out.records.push_back(record);
      if (record.matches_observed) matching.push_back(record.interval);

      if (record.interval.length() < delta) {
        if (++consecutive_tiny > kMaxConsecutiveTiny) {
          throw NumericError(
              "divide_and_conquer stagnated near z = " +
              std::to_string(z_inner) + " after " +
              std::to_string(out.records.size()) + " sub-problems");
        }
      } else {
        consecutive_tiny = 0;
      }
      if (out.records.size() > kMaxRecords) {
        throw NumericError("divide_and_conquer exceeded the sub-problem cap");
      }

      if (record.interval.hi >= basis_window.hi - 0.5 * delta) break;
      z_inner = record.interval.hi + delta;
    }
    z = std::max(basis_window.hi, out.records.back().interval.hi) + delta;
  }

  // Union over matching sub-problems; abutting pieces produced by the nudge
  // are merged.
  out.region = clip_region(normalize_region(std::move(matching), 2.0 * delta),
                           {z_lo, z_hi});
  return out;
}

double truncated_two_sided_p(const LineParametrization& line,
                             const TruncationRegion& region) {
  if (region.empty()) {
    throw NumericError("truncated p-value: empty truncation region");
  }
  const double sd = line.statistic_sd;
  const double cutoff = std::abs(line.observed_statistic);

  const double log_denominator = log_region_mass(region, sd);
  if (log_denominator < std::log(1e-300)) {
    throw NumericError(
        "truncated p-value: truncation region mass is numerically zero");
  }

  TruncationRegion tails;
  for (const auto& iv : region.intervals) {
    const double left_hi = std::min(iv.hi, -cutoff);
    if (iv.lo < left_hi) tails.intervals.push_back({iv.lo, left_hi});
    const double right_lo = std::max(iv.lo, cutoff);
    if (right_lo < iv.hi) tails.intervals.push_back({right_lo, iv.hi});
  }
  if (tails.empty()) return 0.0;

  const double log_numerator = log_region_mass(tails, sd);
  const double p = std::exp(log_numerator - log_denominator);
  return std::clamp(p, 0.0, 1.0);
}

namespace {

struct ObservedPipeline {
  TransportProblem problem;
  TransportSolution solution;
  Eigen::MatrixXd design;     // transported + target stack
  Eigen::MatrixXd transform;  // Omega for the observed transport
  FitResult fit_result;
};

ObservedPipeline run_observed(const TwoDomainDataset& dataset,
                              const PenaltyConfig& penalty) {
  ObservedPipeline obs;
  obs.problem = build_problem(dataset);
  const Eigen::VectorXd response = dataset.stacked_response();
  obs.solution = solve_transport(obs.problem, response);
  auto [design, transform] = apply_transport(obs.solution, dataset);
  obs.design = std::move(design);
  obs.transform = std::move(transform);
  obs.fit_result = fit(obs.design, obs.transform * response, penalty);
  return obs;
}

// Runs `task(i)` for i in [0, count) on up to `threads` workers; slot-indexed
// results keep aggregation deterministic.
void parallel_for(int count, int threads, const std::function<void(int)>& task) {
  threads = std::max(1, std::min(threads, count));
  if (threads == 1) {
    for (int i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      try {
        while (true) {
          const int i = next.fetch_add(1);
          if (i >= count) break;
          task(i);
        }
      } catch (...) {
        errors[static_cast<std::size_t>(t)] = std::current_exception();
      }
    });
  }
  for (auto& worker : pool) worker.join();
  for (auto& err : errors) {
    if (err) std::rethrow_exception(err);
  }
}

}  // namespace

std::vector<FeatureReport> sfs_da(const TwoDomainDataset& dataset,
                                  const PenaltyConfig& penalty, int threads) {
  const ObservedPipeline obs = run_observed(dataset, penalty);
  const auto& active = obs.fit_result.pattern.active_set;
  std::vector<FeatureReport> reports(active.size());
  parallel_for(static_cast<int>(active.size()), threads, [&](int idx) {
    const int feature = active[static_cast<std::size_t>(idx)];
    const Eigen::VectorXd eta = build_eta(dataset, active, feature);
    const LineParametrization line = decompose_line(dataset, eta);
    const DivideAndConquerResult dc =
        divide_and_conquer(dataset, line, penalty, active);

    FeatureReport report;
    report.feature = feature;
    report.statistic = line.observed_statistic;
    report.sigma = line.statistic_sd;
    report.region = dc.region;
    report.subproblem_count = static_cast<int>(dc.records.size());
    report.p_selective = truncated_two_sided_p(line, dc.region);
    reports[static_cast<std::size_t>(idx)] = std::move(report);
  });
  return reports;
}

std::vector<FeatureReport> sfs_da_oc(const TwoDomainDataset& dataset,
                                     const PenaltyConfig& penalty,
                                     int threads) {
  const ObservedPipeline obs = run_observed(dataset, penalty);
  const Eigen::MatrixXd feature_stack = dataset.stacked_features();
  const auto& active = obs.fit_result.pattern.active_set;
  std::vector<FeatureReport> reports(active.size());
  parallel_for(static_cast<int>(active.size()), threads, [&](int idx) {
    const int feature = active[static_cast<std::size_t>(idx)];
    const Eigen::VectorXd eta = build_eta(dataset, active, feature);
    const LineParametrization line = decompose_line(dataset, eta);
    const double z_obs = line.observed_statistic;

    const Interval basis_window =
        basis_region(obs.problem, obs.solution, line, z_obs);
    const Interval selection_window =
        selection_region(feature_stack, obs.transform, line,
                         obs.fit_result.pattern, penalty, z_obs);
    Interval window{std::max(basis_window.lo, selection_window.lo),
                    std::min(basis_window.hi, selection_window.hi)};
    window.lo = std::min(window.lo, z_obs);
    window.hi = std::max(window.hi, z_obs);

    FeatureReport report;
    report.feature = feature;
    report.statistic = z_obs;
    report.sigma = line.statistic_sd;
    report.region.intervals.push_back(window);
    report.subproblem_count = 1;
    report.p_selective = truncated_two_sided_p(line, report.region);
    reports[static_cast<std::size_t>(idx)] = std::move(report);
  });
  return reports;
}

}  // namespace sfsda
