#include "sfsda/transport.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <string>

#include "sfsda/errors.hpp"

namespace sfsda {

TransportProblem build_problem(const TwoDomainDataset& dataset) {
  dataset.validate();
  const Eigen::Index ns = dataset.n_source();
  const Eigen::Index nt = dataset.n_target();
  const Eigen::Index cells = ns * nt;

  TransportProblem prob;
  prob.n_source = ns;
  prob.n_target = nt;

  prob.feature_cost.resize(cells);
  for (Eigen::Index i = 0; i < ns; ++i) {
    for (Eigen::Index j = 0; j < nt; ++j) {
      prob.feature_cost(i * nt + j) =
          (dataset.source_features.row(i) - dataset.target_features.row(j))
              .squaredNorm();
    }
  }

  std::vector<Eigen::Triplet<double>> theta_entries;
  std::vector<Eigen::Triplet<double>> h_entries;
  theta_entries.reserve(static_cast<std::size_t>(2 * cells));
  h_entries.reserve(static_cast<std::size_t>(2 * cells));
  for (Eigen::Index i = 0; i < ns; ++i) {
    for (Eigen::Index j = 0; j < nt; ++j) {
      const int k = static_cast<int>(i * nt + j);
      theta_entries.emplace_back(k, static_cast<int>(i), 1.0);
      theta_entries.emplace_back(k, static_cast<int>(ns + j), -1.0);
      h_entries.emplace_back(static_cast<int>(i), k, 1.0);
      h_entries.emplace_back(static_cast<int>(ns + j), k, 1.0);
    }
  }
  prob.pair_difference_map.resize(cells, ns + nt);
  prob.pair_difference_map.setFromTriplets(theta_entries.begin(),
                                           theta_entries.end());
  prob.constraint_matrix.resize(ns + nt, cells);
  prob.constraint_matrix.setFromTriplets(h_entries.begin(), h_entries.end());

  prob.marginals.resize(ns + nt);
  prob.marginals.head(ns).setConstant(1.0 / static_cast<double>(ns));
  prob.marginals.tail(nt).setConstant(1.0 / static_cast<double>(nt));
  return prob;
}

Eigen::VectorXd total_cost(const TransportProblem& problem,
                           const Eigen::VectorXd& response_stack) {
  if (response_stack.size() != problem.n_source + problem.n_target) {
    throw InputError("total_cost: response stack has wrong length");
  }
  Eigen::VectorXd diff = problem.pair_difference_map * response_stack;
  return problem.feature_cost + diff.cwiseProduct(diff);
}

namespace {

// Spanning-tree state for the transportation simplex. Nodes 0..ns-1 are
// source marginals, ns..ns+nt-1 target marginals; a basic cell (i,j) is the
// tree edge {i, ns+j}.
struct TreeSimplex {
  Eigen::Index ns, nt, cells, nodes;
  const double* cost;
  std::vector<double> flow;
  std::vector<char> is_basic;
  std::vector<std::vector<int>> adjacency;  // node -> incident basic cells
  std::vector<long double> potential;       // long double: keeps reduced-cost
                                            // noise well under the 1e-10 gate

  TreeSimplex(Eigen::Index ns_, Eigen::Index nt_, const double* cost_)
      : ns(ns_),
        nt(nt_),
        cells(ns_ * nt_),
        nodes(ns_ + nt_),
        cost(cost_),
        flow(static_cast<std::size_t>(cells), 0.0),
        is_basic(static_cast<std::size_t>(cells), 0),
        adjacency(static_cast<std::size_t>(nodes)),
        potential(static_cast<std::size_t>(nodes), 0.0L) {}

  int cell_source(int k) const { return k / static_cast<int>(nt); }
  int cell_target_node(int k) const {
    return static_cast<int>(ns) + k % static_cast<int>(nt);
  }

  void add_basic(int k) {
    is_basic[static_cast<std::size_t>(k)] = 1;
    adjacency[static_cast<std::size_t>(cell_source(k))].push_back(k);
    adjacency[static_cast<std::size_t>(cell_target_node(k))].push_back(k);
  }

  void remove_basic(int k) {
    is_basic[static_cast<std::size_t>(k)] = 0;
    auto drop = [&](int node) {
      auto& list = adjacency[static_cast<std::size_t>(node)];
      list.erase(std::find(list.begin(), list.end(), k));
    };
    drop(cell_source(k));
    drop(cell_target_node(k));
  }

  void northwest_corner() {
    std::vector<double> row_left(static_cast<std::size_t>(ns),
                                 1.0 / static_cast<double>(ns));
    std::vector<double> col_left(static_cast<std::size_t>(nt),
                                 1.0 / static_cast<double>(nt));
    Eigen::Index i = 0, j = 0;
    while (true) {
      const int k = static_cast<int>(i * nt + j);
      const double amount = std::min(row_left[static_cast<std::size_t>(i)],
                                     col_left[static_cast<std::size_t>(j)]);
      flow[static_cast<std::size_t>(k)] = amount;
      add_basic(k);
      row_left[static_cast<std::size_t>(i)] -= amount;
      col_left[static_cast<std::size_t>(j)] -= amount;
      if (i == ns - 1 && j == nt - 1) break;
      // Advance exactly one index so the path has ns + nt - 1 cells.
      if (i == ns - 1) {
        ++j;
      } else if (j == nt - 1) {
        ++i;
      } else if (row_left[static_cast<std::size_t>(i)] <=
                 col_left[static_cast<std::size_t>(j)]) {
        ++i;
      } else {
        ++j;
      }
    }
  }

  // Potentials satisfy u_i + v_j = c_ij on basic cells; node 0 is the root.
  void recompute_potentials() {
    std::vector<char> seen(static_cast<std::size_t>(nodes), 0);
    std::deque<int> queue;
    potential[0] = 0.0L;
    seen[0] = 1;
    queue.push_back(0);
    while (!queue.empty()) {
      const int node = queue.front();
      queue.pop_front();
      for (int k : adjacency[static_cast<std::size_t>(node)]) {
        const int src = cell_source(k);
        const int tgt = cell_target_node(k);
        const int other = (node == src) ? tgt : src;
        if (!seen[static_cast<std::size_t>(other)]) {
          seen[static_cast<std::size_t>(other)] = 1;
          potential[static_cast<std::size_t>(other)] =
              static_cast<long double>(cost[k]) -
              potential[static_cast<std::size_t>(node)];
          queue.push_back(other);
        }
      }
    }
    for (char s : seen) {
      if (!s) throw NumericError("transport basis is not a spanning tree");
    }
  }

  long double reduced_cost(int k) const {
    return static_cast<long double>(cost[k]) -
           potential[static_cast<std::size_t>(cell_source(k))] -
           potential[static_cast<std::size_t>(cell_target_node(k))];
  }

  // Unique tree path between the endpoints of the entering cell.
  std::vector<int> path_cells(int from_node, int to_node) const {
    std::vector<int> parent_cell(static_cast<std::size_t>(nodes), -1);
    std::vector<int> parent_node(static_cast<std::size_t>(nodes), -1);
    std::vector<char> seen(static_cast<std::size_t>(nodes), 0);
    std::deque<int> queue;
    seen[static_cast<std::size_t>(from_node)] = 1;
    queue.push_back(from_node);
    while (!queue.empty()) {
      const int node = queue.front();
      queue.pop_front();
      if (node == to_node) break;
      for (int k : adjacency[static_cast<std::size_t>(node)]) {
        const int src = cell_source(k);
        const int tgt = cell_target_node(k);
        const int other = (node == src) ? tgt : src;
        if (!seen[static_cast<std::size_t>(other)]) {
          seen[static_cast<std::size_t>(other)] = 1;
          parent_cell[static_cast<std::size_t>(other)] = k;
          parent_node[static_cast<std::size_t>(other)] = node;
          queue.push_back(other);
        }
      }
    }
    std::vector<int> cells_on_path;
    int node = to_node;
    while (node != from_node) {
      cells_on_path.push_back(parent_cell[static_cast<std::size_t>(node)]);
      node = parent_node[static_cast<std::size_t>(node)];
    }
    std::reverse(cells_on_path.begin(), cells_on_path.end());
    return cells_on_path;
  }

  void solve() {
    northwest_corner();
    recompute_potentials();
    const long double enter_tol = 1e-10L;
    const long long max_pivots =
        10000LL + 200LL * static_cast<long long>(cells);
    long long pivots = 0;
    while (true) {
      // Bland's rule: lowest-index cell with negative reduced cost enters.
      int entering = -1;
      for (int k = 0; k < static_cast<int>(cells); ++k) {
        if (is_basic[static_cast<std::size_t>(k)]) continue;
        if (reduced_cost(k) < -enter_tol) {
          entering = k;
          break;
        }
      }
      if (entering < 0) break;
      if (++pivots > max_pivots) {
        throw NumericError("transportation simplex exceeded pivot budget");
      }

      // Alternate signs around the cycle: the entering cell gains flow, the
      // first path cell loses, and so on.
      const auto on_path =
          path_cells(cell_source(entering), cell_target_node(entering));
      double step = std::numeric_limits<double>::infinity();
      int leaving = -1;
      for (std::size_t idx = 0; idx < on_path.size(); idx += 2) {
        const int k = on_path[idx];
        const double f = flow[static_cast<std::size_t>(k)];
        if (f < step || (f == step && k < leaving)) {
          step = f;
          leaving = k;
        }
      }
      for (std::size_t idx = 0; idx < on_path.size(); ++idx) {
        const int k = on_path[idx];
        if (idx % 2 == 0) {
          flow[static_cast<std::size_t>(k)] -= step;
          if (flow[static_cast<std::size_t>(k)] < 0.0) {
            flow[static_cast<std::size_t>(k)] = 0.0;
          }
        } else {
          flow[static_cast<std::size_t>(k)] += step;
        }
      }
      flow[static_cast<std::size_t>(entering)] = step;
      flow[static_cast<std::size_t>(leaving)] = 0.0;
      add_basic(entering);
      remove_basic(leaving);
      recompute_potentials();
    }
  }
};

}  // namespace

TransportSolution solve_transport(const TransportProblem& problem,
                                  const Eigen::VectorXd& response_stack) {
  const Eigen::VectorXd cost = total_cost(problem, response_stack);
  TreeSimplex simplex(problem.n_source, problem.n_target, cost.data());
  simplex.solve();

  TransportSolution sol;
  sol.plan.setZero(problem.n_source, problem.n_target);
  sol.objective = 0.0;
  for (int k = 0; k < static_cast<int>(problem.n_cells()); ++k) {
    if (simplex.is_basic[static_cast<std::size_t>(k)]) {
      sol.basis.push_back(k);
      const double f = simplex.flow[static_cast<std::size_t>(k)];
      sol.plan(k / problem.n_target, k % problem.n_target) = f;
      sol.objective += f * cost(k);
    }
  }
  return sol;
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> apply_transport(
    const TransportSolution& solution, const TwoDomainDataset& dataset) {
  const Eigen::Index ns = dataset.n_source();
  const Eigen::Index nt = dataset.n_target();
  if (solution.plan.rows() != ns || solution.plan.cols() != nt) {
    throw InputError("apply_transport: plan shape does not match dataset");
  }
  Eigen::MatrixXd transform = Eigen::MatrixXd::Zero(ns + nt, ns + nt);
  transform.topRightCorner(ns, nt) = static_cast<double>(ns) * solution.plan;
  transform.bottomRightCorner(nt, nt) =
      Eigen::MatrixXd::Identity(nt, nt);

  Eigen::MatrixXd design(ns + nt, dataset.n_features());
  design.topRows(ns) =
      static_cast<double>(ns) * solution.plan * dataset.target_features;
  design.bottomRows(nt) = dataset.target_features;
  return {std::move(design), std::move(transform)};
}

namespace {

// Shrinks [lo, hi] to the piece of {z : p + q z + r z^2 >= 0} that contains
// z0. Per-constraint work keeps exactly the connected component of the full
// intersection that contains z0.
void apply_quadratic_constraint(double p, double q, double r, double z0,
                                double& lo, double& hi) {
  const double coef_tol = 1e-12;
  if (std::abs(r) <= coef_tol) {
    if (std::abs(q) <= coef_tol) {
      if (p >= -1e-12) return;  // holds everywhere
      lo = hi = z0;             // degenerate: holds nowhere
      return;
    }
    const double root = -p / q;
    if (q > 0.0) {
      lo = std::max(lo, root);
    } else {
      hi = std::min(hi, root);
    }
    return;
  }

  const double disc = q * q - 4.0 * r * p;
  if (disc <= 0.0) {
    if (r > 0.0) return;  // parabola opens up, never negative
    lo = hi = z0;         // opens down, nonnegative at most at one point
    return;
  }

  // Sign-aware quadratic formula avoids cancellation in the small root.
  const double sqrt_disc = std::sqrt(disc);
  const double t = -0.5 * (q + std::copysign(sqrt_disc, q));
  double root_a = t / r;
  double root_b = (t != 0.0) ? p / t : -q / r - root_a;
  const double z1 = std::min(root_a, root_b);
  const double z2 = std::max(root_a, root_b);

  if (r < 0.0) {
    // Feasible between the roots.
    lo = std::max(lo, z1);
    hi = std::min(hi, z2);
  } else {
    // Feasible outside the roots; keep the side z0 is on.
    if (z0 < 0.5 * (z1 + z2)) {
      hi = std::min(hi, z1);
    } else {
      lo = std::max(lo, z2);
    }
  }
}

}  // namespace

Interval basis_region(const TransportProblem& problem,
                      const TransportSolution& solution,
                      const LineParametrization& line, double z_current) {
  const Eigen::Index ns = problem.n_source;
  const Eigen::Index nt = problem.n_target;
  const Eigen::Index m = ns + nt;
  const Eigen::Index basis_size = m - 1;
  if (static_cast<Eigen::Index>(solution.basis.size()) != basis_size) {
    throw NumericError("basis_region: basis has wrong cardinality");
  }

  const Eigen::VectorXd theta_a = problem.pair_difference_map * line.anchor;
  const Eigen::VectorXd theta_b = problem.pair_difference_map * line.direction;
  const Eigen::VectorXd poly_p =
      problem.feature_cost + theta_a.cwiseProduct(theta_a);
  const Eigen::VectorXd poly_q = 2.0 * theta_a.cwiseProduct(theta_b);
  const Eigen::VectorXd poly_r = theta_b.cwiseProduct(theta_b);

  // The constraint matrix has rank m - 1; drop the last target-marginal row
  // so the basis submatrix is square and invertible for spanning-tree bases.
  Eigen::MatrixXd basis_block = Eigen::MatrixXd::Zero(basis_size, basis_size);
  Eigen::VectorXd p_basic(basis_size), q_basic(basis_size), r_basic(basis_size);
  for (Eigen::Index col = 0; col < basis_size; ++col) {
    const int k = solution.basis[static_cast<std::size_t>(col)];
    const Eigen::Index i = k / nt;
    const Eigen::Index tgt_row = ns + k % nt;
    basis_block(i, col) = 1.0;
    if (tgt_row < m - 1) basis_block(tgt_row, col) = 1.0;
    p_basic(col) = poly_p(k);
    q_basic(col) = poly_q(k);
    r_basic(col) = poly_r(k);
  }

  Eigen::FullPivLU<Eigen::MatrixXd> lu(basis_block.transpose());
  if (!lu.isInvertible()) {
    throw NumericError(
        "basis_region: singular basis submatrix (non-basic or corrupted "
        "basis)");
  }
  const Eigen::VectorXd wp = lu.solve(p_basic);
  const Eigen::VectorXd wq = lu.solve(q_basic);
  const Eigen::VectorXd wr = lu.solve(r_basic);

  double lo = line.z_min();
  double hi = line.z_max();
  std::vector<char> in_basis(static_cast<std::size_t>(problem.n_cells()), 0);
  for (int k : solution.basis) in_basis[static_cast<std::size_t>(k)] = 1;
  for (int k = 0; k < static_cast<int>(problem.n_cells()); ++k) {
    if (in_basis[static_cast<std::size_t>(k)]) continue;
    const Eigen::Index i = k / nt;
    const Eigen::Index tgt_row = ns + k % nt;
    double hp = wp(i), hq = wq(i), hr = wr(i);
    if (tgt_row < m - 1) {
      hp += wp(tgt_row);
      hq += wq(tgt_row);
      hr += wr(tgt_row);
    }
    apply_quadratic_constraint(poly_p(k) - hp, poly_q(k) - hq, poly_r(k) - hr,
                               z_current, lo, hi);
  }

  // The solved-at point always belongs to its own region.
  lo = std::min(lo, z_current);
  hi = std::max(hi, z_current);
  return {lo, hi};
}

}  // namespace sfsda
