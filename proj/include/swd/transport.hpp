#pragma once

// Discrete 1-Wasserstein solvers with Euclidean ground cost.
//
// solve_w1_exact runs a transportation simplex (Dantzig entering rule) on the
// complete bipartite problem. Degeneracy is broken by a deterministic
// epsilon-perturbation of the supplies; the returned plan is re-balanced on
// the optimal basis tree against the unperturbed marginals, which keeps both
// feasibility and the cost exact. brute_force_w1 enumerates permutation
// couplings and serves as the independent oracle on tiny instances.
// sinkhorn_w1 is a log-domain entropically regularized approximation for
// instances past the exact solver's size cap.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

#include "swd/common.hpp"
#include "swd/measures.hpp"

namespace swd {

struct TransportPlan {
  std::size_t n = 0;
  std::size_t m = 0;
  std::vector<double> plan;  // row-major n x m
  double cost = 0.0;

  double at(std::size_t i, std::size_t j) const { return plan[i * m + j]; }
};

struct ExactSolverOptions {
  std::size_t max_entries = 4'000'000;
};

namespace detail {

inline double euclid(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double t = a[k] - b[k];
    acc += t * t;
  }
  return std::sqrt(acc);
}

// Basis tree of a transportation simplex: n source nodes, m target nodes,
// n+m-1 basic arcs kept in fixed slots.
struct BasisTree {
  std::size_t n, m;
  std::vector<int> row, col;      // arc endpoints per slot
  std::vector<double> flow;       // arc flow per slot
  std::vector<std::vector<int>> adj;  // node -> incident arc slots

  BasisTree(std::size_t n_, std::size_t m_) : n(n_), m(m_), adj(n_ + m_) {
    row.reserve(n + m - 1);
    col.reserve(n + m - 1);
    flow.reserve(n + m - 1);
  }

  void add_arc(int i, int j, double f) {
    const int slot = static_cast<int>(row.size());
    row.push_back(i);
    col.push_back(j);
    flow.push_back(f);
    adj[i].push_back(slot);
    adj[n + j].push_back(slot);
  }

  void replace_arc(int slot, int i, int j, double f) {
    detach(slot);
    row[slot] = i;
    col[slot] = j;
    flow[slot] = f;
    adj[i].push_back(slot);
    adj[n + j].push_back(slot);
  }

  void detach(int slot) {
    auto remove_from = [&](std::size_t node) {
      auto& list = adj[node];
      list.erase(std::find(list.begin(), list.end(), slot));
    };
    remove_from(row[slot]);
    remove_from(n + col[slot]);
  }

  std::size_t other_end(int slot, std::size_t node) const {
    const std::size_t r = static_cast<std::size_t>(row[slot]);
    return node == r ? n + col[slot] : r;
  }
};

}  // namespace detail

// Exact permutation-coupling minimum; oracle for equal-weight instances.
inline double brute_force_w1(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  require(mu.size() == nu.size(), "brute_force_w1: sizes must match");
  require(mu.size() <= 8, "brute_force_w1: limited to n <= 8");
  require(mu.has_uniform_weights() && nu.has_uniform_weights(),
          "brute_force_w1: weights must be uniform");
  require_dims(mu.dim() == nu.dim(), "brute_force_w1: dimension mismatch");
  const std::size_t n = mu.size();
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      total += detail::euclid(mu.point(i), nu.point(perm[i]));
    best = std::min(best, total);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best / static_cast<double>(n);
}

// Order-statistic coupling; exact for equal-cardinality uniform 1-D inputs.
inline double solve_w1_1d_sorted(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  require_dims(mu.dim() == 1 && nu.dim() == 1, "solve_w1_1d_sorted: inputs must be 1-D");
  require(mu.size() == nu.size(), "solve_w1_1d_sorted: equal cardinality required");
  require(mu.has_uniform_weights() && nu.has_uniform_weights(),
          "solve_w1_1d_sorted: weights must be uniform");
  std::vector<double> xs(mu.raw_points());
  std::vector<double> ys(nu.raw_points());
  std::sort(xs.begin(), xs.end());
  std::sort(ys.begin(), ys.end());
  long double acc = 0.0L;
  for (std::size_t i = 0; i < xs.size(); ++i) acc += std::abs(xs[i] - ys[i]);
  return static_cast<double>(acc / static_cast<long double>(xs.size()));
}

inline TransportPlan solve_w1_exact(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                    const ExactSolverOptions& options = {}) {
  require_dims(mu.dim() == nu.dim(), "solve_w1_exact: dimension mismatch");
  const std::size_t n = mu.size();
  const std::size_t m = nu.size();
  if (n * m > options.max_entries)
    throw resource_error("solve_w1_exact: instance exceeds the entry cap (" +
                         std::to_string(n * m) + " > " +
                         std::to_string(options.max_entries) + ")");

  // Cost matrix; the entry cap bounds this at a predictable size.
  std::vector<double> cost(n * m);
  double max_cost = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto xi = mu.point(i);
    for (std::size_t j = 0; j < m; ++j) {
      const double c = detail::euclid(xi, nu.point(j));
      cost[i * m + j] = c;
      max_cost = std::max(max_cost, c);
    }
  }

  // Perturbed marginals make the simplex nondegenerate (anti-cycling).
  constexpr double kDelta = 1e-12;
  std::vector<double> a(n), b(m);
  double total_delta = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = kDelta * static_cast<double>(i + 1);
    a[i] = mu.weight(i) + d;
    total_delta += d;
  }
  for (std::size_t j = 0; j < m; ++j) b[j] = nu.weight(j);
  b[m - 1] += total_delta;

  // Northwest-corner start: exactly n+m-1 basic arcs.
  detail::BasisTree tree(n, m);
  {
    std::size_t i = 0, j = 0;
    double ra = a[0], rb = b[0];
    while (true) {
      const double f = std::min(ra, rb);
      tree.add_arc(static_cast<int>(i), static_cast<int>(j), f);
      ra -= f;
      rb -= f;
      if (i == n - 1 && j == m - 1) break;
      if (ra <= rb) {
        if (i < n - 1) {
          ++i;
          ra = a[i];
        } else {
          ++j;
          rb = b[j];
        }
      } else {
        if (j < m - 1) {
          ++j;
          rb = b[j];
        } else {
          ++i;
          ra = a[i];
        }
      }
    }
  }

  const std::size_t node_count = n + m;
  const double tol = 1e-12 * (1.0 + max_cost);
  std::vector<double> u(n), v(m);
  std::vector<char> seen(node_count);
  std::vector<std::size_t> stack;
  std::vector<int> parent_arc(node_count);
  std::vector<std::size_t> parent_node(node_count);
  std::vector<int> path;

  const std::size_t max_pivots = 1000 + 200 * node_count;
  std::size_t pivot = 0;
  for (;; ++pivot) {
    if (pivot > max_pivots)
      throw convergence_error("solve_w1_exact: pivot limit exceeded");

    // Duals from the basis tree, rooted at source 0.
    std::fill(seen.begin(), seen.end(), 0);
    stack.assign(1, 0);
    seen[0] = 1;
    u[0] = 0.0;
    while (!stack.empty()) {
      const std::size_t node = stack.back();
      stack.pop_back();
      for (int slot : tree.adj[node]) {
        const std::size_t next = tree.other_end(slot, node);
        if (seen[next]) continue;
        seen[next] = 1;
        const std::size_t r = static_cast<std::size_t>(tree.row[slot]);
        const std::size_t c = static_cast<std::size_t>(tree.col[slot]);
        if (next >= n)
          v[c] = cost[r * m + c] - u[r];
        else
          u[r] = cost[r * m + c] - v[c];
        stack.push_back(next);
      }
    }

    // Dantzig rule: most negative reduced cost enters.
    double best = -tol;
    int enter_i = -1, enter_j = -1;
    for (std::size_t i = 0; i < n; ++i) {
      const double ui = u[i];
      const double* ci = cost.data() + i * m;
      for (std::size_t j = 0; j < m; ++j) {
        const double rc = ci[j] - ui - v[j];
        if (rc < best) {
          best = rc;
          enter_i = static_cast<int>(i);
          enter_j = static_cast<int>(j);
        }
      }
    }
    if (enter_i < 0) break;  // optimal

    // Tree path from the entering source to the entering target.
    std::fill(seen.begin(), seen.end(), 0);
    stack.assign(1, static_cast<std::size_t>(enter_i));
    seen[enter_i] = 1;
    parent_arc[enter_i] = -1;
    const std::size_t target = n + static_cast<std::size_t>(enter_j);
    while (!stack.empty()) {
      const std::size_t node = stack.back();
      stack.pop_back();
      if (node == target) break;
      for (int slot : tree.adj[node]) {
        const std::size_t next = tree.other_end(slot, node);
        if (seen[next]) continue;
        seen[next] = 1;
        parent_arc[next] = slot;
        parent_node[next] = node;
        stack.push_back(next);
      }
    }

    path.clear();
    for (std::size_t node = target; node != static_cast<std::size_t>(enter_i);
         node = parent_node[node])
      path.push_back(parent_arc[node]);
    std::reverse(path.begin(), path.end());

    // Arcs at odd positions (1-based) lose flow; even positions gain.
    double theta = std::numeric_limits<double>::infinity();
    int leave_slot = -1;
    for (std::size_t p = 0; p < path.size(); p += 2) {
      if (tree.flow[path[p]] < theta) {
        theta = tree.flow[path[p]];
        leave_slot = path[p];
      }
    }
    for (std::size_t p = 0; p < path.size(); ++p)
      tree.flow[path[p]] += (p % 2 == 0) ? -theta : theta;
    tree.replace_arc(leave_slot, enter_i, enter_j, theta);
  }

  // Re-balance flows on the optimal tree against the unperturbed marginals
  // by stripping leaves; flows come out exact up to the perturbation mass.
  std::vector<double> rem(node_count);
  for (std::size_t i = 0; i < n; ++i) rem[i] = mu.weight(i);
  for (std::size_t j = 0; j < m; ++j) rem[n + j] = nu.weight(j);
  std::vector<std::size_t> degree(node_count);
  std::vector<char> arc_done(tree.row.size(), 0);
  std::vector<std::size_t> leaves;
  for (std::size_t nd = 0; nd < node_count; ++nd) {
    degree[nd] = tree.adj[nd].size();
    if (degree[nd] == 1) leaves.push_back(nd);
  }
  TransportPlan result;
  result.n = n;
  result.m = m;
  result.plan.assign(n * m, 0.0);
  long double total_cost = 0.0L;
  while (!leaves.empty()) {
    const std::size_t leaf = leaves.back();
    leaves.pop_back();
    if (degree[leaf] != 1) continue;
    int slot = -1;
    for (int s : tree.adj[leaf])
      if (!arc_done[s]) {
        slot = s;
        break;
      }
    if (slot < 0) continue;
    arc_done[slot] = 1;
    const double f = rem[leaf];
    const std::size_t other = tree.other_end(slot, leaf);
    rem[other] -= f;
    degree[leaf] = 0;
    if (--degree[other] == 1) leaves.push_back(other);
    const std::size_t r = static_cast<std::size_t>(tree.row[slot]);
    const std::size_t c = static_cast<std::size_t>(tree.col[slot]);
    const double clamped = std::max(f, 0.0);
    result.plan[r * m + c] = clamped;
    total_cost += static_cast<long double>(clamped) * cost[r * m + c];
  }
  result.cost = static_cast<double>(total_cost);
  return result;
}

struct SinkhornResult {
  double cost = 0.0;
  bool converged = false;
  double marginal_violation = 0.0;
  std::size_t iterations = 0;
  double epsilon = 0.0;
};

inline SinkhornResult sinkhorn_w1(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                  double epsilon, std::size_t max_iter = 5000) {
  require_param(epsilon > 0.0, "sinkhorn_w1: epsilon must be > 0");
  require_dims(mu.dim() == nu.dim(), "sinkhorn_w1: dimension mismatch");
  const std::size_t n = mu.size();
  const std::size_t m = nu.size();
  std::vector<double> la(n), lb(m);
  for (std::size_t i = 0; i < n; ++i) {
    require_param(mu.weight(i) > 0.0, "sinkhorn_w1: weights must be positive");
    la[i] = std::log(mu.weight(i));
  }
  for (std::size_t j = 0; j < m; ++j) {
    require_param(nu.weight(j) > 0.0, "sinkhorn_w1: weights must be positive");
    lb[j] = std::log(nu.weight(j));
  }

  std::vector<double> f(n, 0.0), g(m, 0.0);
  std::vector<double> scratch(std::max(n, m));

  auto lse = [](const std::vector<double>& vals, std::size_t count) {
    double hi = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < count; ++k) hi = std::max(hi, vals[k]);
    double acc = 0.0;
    for (std::size_t k = 0; k < count; ++k) acc += std::exp(vals[k] - hi);
    return hi + std::log(acc);
  };

  auto iterate = [&](double eps) {
    const double inv = 1.0 / eps;
    for (std::size_t i = 0; i < n; ++i) {
      const auto xi = mu.point(i);
      for (std::size_t j = 0; j < m; ++j)
        scratch[j] = (g[j] - detail::euclid(xi, nu.point(j))) * inv + lb[j];
      f[i] = -eps * lse(scratch, m);
    }
    for (std::size_t j = 0; j < m; ++j) {
      const auto yj = nu.point(j);
      for (std::size_t i = 0; i < n; ++i)
        scratch[i] = (f[i] - detail::euclid(mu.point(i), yj)) * inv + la[i];
      g[j] = -eps * lse(scratch, n);
    }
  };

  SinkhornResult out;
  out.epsilon = epsilon;
  constexpr double kMarginalTol = 1e-6;

  double max_cost = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j)
      max_cost = std::max(max_cost, detail::euclid(mu.point(i), nu.point(j)));

  // Epsilon scaling: anneal the potentials from a coarse regularization down
  // to the target, then iterate at the target until the marginals close.
  double eps_run = std::max(epsilon, 0.25 * max_cost);
  while (eps_run > epsilon && out.iterations < max_iter) {
    iterate(eps_run);
    ++out.iterations;
    eps_run = std::max(epsilon, 0.5 * eps_run);
  }
  const double inv_eps = 1.0 / epsilon;
  while (out.iterations < max_iter) {
    iterate(epsilon);
    ++out.iterations;
    // Column marginals are exact after the g-update; check the rows.
    double violation = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto xi = mu.point(i);
      double row = 0.0;
      for (std::size_t j = 0; j < m; ++j)
        row += std::exp((f[i] + g[j] - detail::euclid(xi, nu.point(j))) * inv_eps +
                        la[i] + lb[j]);
      violation += std::abs(row - mu.weight(i));
    }
    out.marginal_violation = violation;
    if (violation < kMarginalTol) {
      out.converged = true;
      break;
    }
  }

  long double cost = 0.0L;
  for (std::size_t i = 0; i < n; ++i) {
    const auto xi = mu.point(i);
    for (std::size_t j = 0; j < m; ++j) {
      const double c = detail::euclid(xi, nu.point(j));
      cost += static_cast<long double>(
                  std::exp((f[i] + g[j] - c) * inv_eps + la[i] + lb[j])) *
              c;
    }
  }
  out.cost = static_cast<double>(cost);
  return out;
}

}  // namespace swd
