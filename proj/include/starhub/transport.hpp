#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "starhub/error.hpp"
#include "starhub/hub_classing.hpp"
#include "starhub/matrix.hpp"
#include "starhub/simplex.hpp"

namespace starhub {

// Balance tolerance: 1e-9 for floating types, exact otherwise (rationals).
template <class T>
T balance_tolerance() {
  if constexpr (std::is_floating_point_v<T>) return T(1e-9);
  else return T(0);
}

template <class T>
T abs_value(const T& v) {
  return v < T(0) ? T(-v) : v;
}

// Hitchcock transportation problem: ship supply to demand at least cost.
template <class T>
struct TransportInstance {
  std::vector<T> supply;
  std::vector<T> demand;
  Matrix<T> cost;
};

template <class T>
struct TransportPlan {
  Matrix<T> flow;
  T cost{};
};

template <class T>
T plan_cost(const Matrix<T>& cost, const Matrix<T>& flow) {
  T total(0);
  for (std::size_t i = 0; i < flow.rows(); ++i)
    for (std::size_t j = 0; j < flow.cols(); ++j) total += cost(i, j) * flow(i, j);
  return total;
}

template <class T>
void check_transport(const TransportInstance<T>& t) {
  if (t.cost.rows() != t.supply.size() || t.cost.cols() != t.demand.size())
    throw Error(ErrorKind::dimension_mismatch, "transport cost matrix does not match marginals");
  T sa(0), sb(0);
  for (const T& v : t.supply) {
    if (v < T(0)) throw Error(ErrorKind::invalid_argument, "negative supply");
    sa += v;
  }
  for (const T& v : t.demand) {
    if (v < T(0)) throw Error(ErrorKind::invalid_argument, "negative demand");
    sb += v;
  }
  if (abs_value(T(sa - sb)) > balance_tolerance<T>())
    throw Error(ErrorKind::invalid_argument, "unbalanced transport marginals");
}

// North-west corner rule in the instance's own row/column order: fill the
// current cell as far as row and column allow, then step east if the column
// is exhausted, else south.
template <class T>
TransportPlan<T> nwcr(const TransportInstance<T>& t) {
  check_transport(t);
  const std::size_t rows = t.supply.size();
  const std::size_t cols = t.demand.size();
  TransportPlan<T> plan{Matrix<T>(rows, cols, T(0)), T(0)};
  if (rows == 0 || cols == 0) return plan;

  std::vector<T> row_left = t.supply;
  std::vector<T> col_left = t.demand;
  std::size_t i = 0, j = 0;
  while (i < rows && j < cols) {
    const T amount = std::min(row_left[i], col_left[j]);
    plan.flow(i, j) += amount;
    row_left[i] -= amount;
    col_left[j] -= amount;
    const bool column_done = !(col_left[j] > T(0));
    if (i == rows - 1 && j == cols - 1) break;
    if (column_done && j + 1 < cols) ++j;
    else ++i;
  }
  plan.cost = plan_cost(t.cost, plan.flow);
  return plan;
}

// NWCR after reordering rows and columns; the plan is returned in the
// original indexing.
template <class T>
TransportPlan<T> nwcr(const TransportInstance<T>& t, std::span<const std::size_t> row_order,
                      std::span<const std::size_t> col_order) {
  if (row_order.size() != t.supply.size() || col_order.size() != t.demand.size())
    throw Error(ErrorKind::dimension_mismatch, "nwcr: order length does not match marginals");
  TransportInstance<T> permuted;
  permuted.cost = Matrix<T>(row_order.size(), col_order.size());
  for (std::size_t a = 0; a < row_order.size(); ++a) {
    permuted.supply.push_back(t.supply[row_order[a]]);
    for (std::size_t b = 0; b < col_order.size(); ++b) permuted.cost(a, b) = t.cost(row_order[a], col_order[b]);
  }
  for (std::size_t b = 0; b < col_order.size(); ++b) permuted.demand.push_back(t.demand[col_order[b]]);
  const auto inner = nwcr(permuted);
  TransportPlan<T> plan{Matrix<T>(t.supply.size(), t.demand.size(), T(0)), inner.cost};
  for (std::size_t a = 0; a < row_order.size(); ++a)
    for (std::size_t b = 0; b < col_order.size(); ++b) plan.flow(row_order[a], col_order[b]) = inner.flow(a, b);
  return plan;
}

// c_ij + c_i'j' <= c_ij' + c_i'j for all i < i', j < j'. Exhaustive.
template <class T>
bool is_monge(const Matrix<T>& c, const T& tolerance = T(0)) {
  for (std::size_t i = 0; i < c.rows(); ++i)
    for (std::size_t i2 = i + 1; i2 < c.rows(); ++i2)
      for (std::size_t j = 0; j < c.cols(); ++j)
        for (std::size_t j2 = j + 1; j2 < c.cols(); ++j2)
          if (c(i, j) + c(i2, j2) > c(i, j2) + c(i2, j) + tolerance) return false;
  return true;
}

template <class T>
Matrix<T> permute(const Matrix<T>& c, std::span<const std::size_t> row_order, std::span<const std::size_t> col_order) {
  Matrix<T> out(row_order.size(), col_order.size());
  for (std::size_t a = 0; a < row_order.size(); ++a)
    for (std::size_t b = 0; b < col_order.size(); ++b) out(a, b) = c(row_order[a], col_order[b]);
  return out;
}

// Does ordering rows and columns of a square matrix by `order` make it Monge?
template <class T>
bool find_monge_order(const Matrix<T>& c, std::span<const std::size_t> order, const T& tolerance = T(0)) {
  if (c.rows() != c.cols() || order.size() != c.rows())
    throw Error(ErrorKind::dimension_mismatch, "find_monge_order: square matrix and full permutation required");
  return is_monge(permute(c, order, order), tolerance);
}

// Surrogate hub-pair costs: |u_i - u_j| for same-parity classes, u_i + u_j
// otherwise. Equals |s_i - s_j| for the signed positions s.
struct HatCostMatrix {
  Matrix<double> cost;
  std::vector<double> position;
};

inline HatCostMatrix build_hat_matrix(const HubClassing& hc) {
  const std::size_t h = hc.hub_count();
  HatCostMatrix hat{Matrix<double>(h, h), std::vector<double>(h)};
  for (std::size_t i = 0; i < h; ++i) {
    hat.position[i] = hc.position(i);
    for (std::size_t j = 0; j < h; ++j) {
      const bool same_parity = (hc.alpha[i] - hc.alpha[j]) % 2 == 0;
      hat.cost(i, j) = same_parity ? std::abs(hc.u[i] - hc.u[j]) : hc.u[i] + hc.u[j];
    }
  }
  return hat;
}

// Hubs sorted by ascending line position (stable).
inline std::vector<std::size_t> line_order(const HatCostMatrix& hat) {
  std::vector<std::size_t> order(hat.position.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return hat.position[a] < hat.position[b]; });
  return order;
}

// Exact optimum of the transport LP via the dense simplex.
inline TransportPlan<double> transport_optimal(const TransportInstance<double>& t) {
  check_transport(t);
  const std::size_t rows = t.supply.size();
  const std::size_t cols = t.demand.size();
  EqualityLp lp;
  lp.objective.resize(rows * cols);
  lp.constraints = Matrix<double>(rows + cols, rows * cols);
  lp.rhs.resize(rows + cols);
  for (std::size_t i = 0; i < rows; ++i) {
    lp.rhs[i] = t.supply[i];
    for (std::size_t j = 0; j < cols; ++j) {
      const std::size_t v = i * cols + j;
      lp.objective[v] = t.cost(i, j);
      lp.constraints(i, v) = 1.0;
      lp.constraints(rows + j, v) = 1.0;
    }
  }
  for (std::size_t j = 0; j < cols; ++j) lp.rhs[rows + j] = t.demand[j];

  const auto res = solve_simplex(lp);
  if (res.status != SolveStatus::optimal)
    throw Error(ErrorKind::internal_error, std::string("transport LP: ") + to_string(res.status));
  TransportPlan<double> plan{Matrix<double>(rows, cols), 0.0};
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) plan.flow(i, j) = res.x[i * cols + j];
  plan.cost = plan_cost(t.cost, plan.flow);
  return plan;
}

template <class T>
void check_stochastic(std::span<const T> x, const char* name) {
  T sum(0);
  for (const T& v : x) {
    if (v < T(0)) throw Error(ErrorKind::invalid_argument, std::string(name) + " has a negative entry");
    sum += v;
  }
  const T tol = std::is_floating_point_v<T> ? T(1e-9) : T(0);
  if (abs_value(T(sum - T(1))) > tol) throw Error(ErrorKind::invalid_argument, std::string(name) + " does not sum to 1");
}

// Coupling of two distributions over hubs that keeps min(x_pi, x_qi) on the
// diagonal and routes each row's surplus (x_pi - x_qi)+ to columns with
// spare demand, sweeping columns left to right.
template <class T>
TransportPlan<T> couple_from_marginals(std::span<const T> xp, std::span<const T> xq) {
  if (xp.size() != xq.size()) throw Error(ErrorKind::dimension_mismatch, "coupling: marginal sizes differ");
  check_stochastic(xp, "x_p");
  check_stochastic(xq, "x_q");
  const std::size_t h = xp.size();
  TransportPlan<T> plan{Matrix<T>(h, h, T(0)), T(0)};
  std::vector<T> row_left(h), col_left(h);
  for (std::size_t i = 0; i < h; ++i) {
    const T d = std::min(xp[i], xq[i]);
    plan.flow(i, i) = d;
    row_left[i] = xp[i] - d;
    col_left[i] = xq[i] - d;
  }
  for (std::size_t i = 0; i < h; ++i) {
    for (std::size_t j = 0; j < h && row_left[i] > T(0); ++j) {
      if (!(col_left[j] > T(0))) continue;
      const T amount = std::min(row_left[i], col_left[j]);
      plan.flow(i, j) += amount;
      row_left[i] -= amount;
      col_left[j] -= amount;
    }
  }
  return plan;
}

// sum_{i != j} (l_i + l_j) y_ij
template <class T, class L>
T star_cost(const Matrix<T>& flow, std::span<const L> lengths) {
  T total(0);
  for (std::size_t i = 0; i < flow.rows(); ++i)
    for (std::size_t j = 0; j < flow.cols(); ++j)
      if (i != j) total += T(lengths[i] + lengths[j]) * flow(i, j);
  return total;
}

// sum_i l_i |x_pi - x_qi|
template <class T, class L>
T weighted_l1(std::span<const L> lengths, std::span<const T> xp, std::span<const T> xq) {
  T total(0);
  for (std::size_t i = 0; i < lengths.size(); ++i) total += T(lengths[i]) * abs_value(T(xp[i] - xq[i]));
  return total;
}

// Total flow between the hub blocks of two classes.
template <class T>
T block_mass(const Matrix<T>& flow, std::span<const int> row_class, std::span<const int> col_class, int kappa_row,
             int kappa_col) {
  T total(0);
  for (std::size_t i = 0; i < flow.rows(); ++i)
    for (std::size_t j = 0; j < flow.cols(); ++j)
      if (row_class[i] == kappa_row && col_class[j] == kappa_col) total += flow(i, j);
  return total;
}

}  // namespace starhub
