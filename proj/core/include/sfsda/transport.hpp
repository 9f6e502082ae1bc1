#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <utility>
#include <vector>

#include "sfsda/dataset.hpp"
#include "sfsda/intervals.hpp"
#include "sfsda/line.hpp"

namespace sfsda {

/// Transportation LP in vectorized form. Cells are indexed row-major:
/// cell (i, j) <-> variable k = i * n_t + j. The response part of the cost
/// is kept symbolic (through pair_difference_map) so the problem can be
/// re-costed anywhere along a response line without rebuilding.
struct TransportProblem {
  Eigen::Index n_source = 0;
  Eigen::Index n_target = 0;

  /// Squared feature distances ||X^s_i - X^t_j||^2, length n_s * n_t.
  Eigen::VectorXd feature_cost;
  /// Maps a stacked response y to pairwise differences: row (i,j) of the
  /// product is y_i^s - y_j^t.  n_s n_t x (n_s + n_t).
  Eigen::SparseMatrix<double> pair_difference_map;
  /// Marginal constraint matrix: column (i,j) has a one in source row i and
  /// target row n_s + j.  (n_s + n_t) x n_s n_t.
  Eigen::SparseMatrix<double> constraint_matrix;
  /// Right-hand side (1/n_s,...,1/n_t,...).
  Eigen::VectorXd marginals;

  Eigen::Index n_cells() const { return n_source * n_target; }
};

/// Optimal basic feasible solution of the transportation LP.
struct TransportSolution {
  Eigen::MatrixXd plan;     // n_s x n_t, nonnegative, fixed marginals
  std::vector<int> basis;   // sorted cell indices, size n_s + n_t - 1
  double objective = 0.0;
};

TransportProblem build_problem(const TwoDomainDataset& dataset);

/// Full cost vector at a given stacked response:
/// feature_cost + (Theta y) o (Theta y).
Eigen::VectorXd total_cost(const TransportProblem& problem,
                           const Eigen::VectorXd& response_stack);

/// Transportation simplex (northwest-corner start, Bland's rule).
/// Non-basic plan entries are exactly zero; reduced costs of non-basic
/// variables are >= -1e-9 at exit.
TransportSolution solve_transport(const TransportProblem& problem,
                                  const Eigen::VectorXd& response_stack);

/// Barycentric transfer of the source rows onto the target domain.
/// Returns the combined design Omega * (X^s; X^t) = (n_s T X^t; X^t) and
/// the transform Omega itself, which is re-applied to responses along the
/// line.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> apply_transport(
    const TransportSolution& solution, const TwoDomainDataset& dataset);

/// Interval of z around z_current on which the given optimal basis stays
/// optimal (the reduced costs, quadratic in z, stay nonnegative). When the
/// feasible set is a union, the piece containing z_current is returned.
/// The interval may have zero width in degenerate tie cases.
Interval basis_region(const TransportProblem& problem,
                      const TransportSolution& solution,
                      const LineParametrization& line, double z_current);

}  // namespace sfsda
