#pragma once

#include <cmath>
#include <cstddef>
#include <sstream>
#include <string>
#include <vector>

#include "starhub/error.hpp"
#include "starhub/instance.hpp"
#include "starhub/instance_io.hpp"
#include "starhub/matrix.hpp"
#include "starhub/simplex.hpp"

namespace starhub {

enum class ColumnKind { x, z, slack };

// What a column of the relaxation stands for. For x: (nonhub, hub). For z:
// (nonhub p, nonhub q, hub) of the unordered pair p < q. For slack: the row.
struct ColumnInfo {
  ColumnKind kind = ColumnKind::x;
  std::size_t a = 0;
  std::size_t b = 0;
  std::size_t c = 0;
};

// Linear relaxation in equality form:
//   sum_i x_pi = 1                         (one row per non-hub)
//   x_pk - x_qk - Z_pqk + s = 0            (two rows per pair and hub,
//  -x_pk + x_qk - Z_pqk + s' = 0            one per sign)
// Ordered pairs (p,q) and (q,p) share a Z block weighted by w_pq + w_qp;
// pairs with no flow get no block.
struct LinearProgram {
  std::size_t nonhubs = 0;
  std::size_t hubs = 0;
  EqualityLp program;
  std::vector<ColumnInfo> columns;
  std::vector<std::string> row_names;

  std::size_t x_column(std::size_t p, std::size_t i) const { return p * hubs + i; }
};

inline LinearProgram build_lrp(const Instance& inst) {
  const std::size_t n = inst.nonhub_count();
  const std::size_t h = inst.hub_count();

  struct PairBlock {
    std::size_t p, q;
    double weight;
  };
  std::vector<PairBlock> blocks;
  for (std::size_t p = 0; p < n; ++p)
    for (std::size_t q = p + 1; q < n; ++q)
      if (double wt = inst.pair_weight(p, q); wt > 0.0) blocks.push_back({p, q, wt});

  const std::size_t x_cols = n * h;
  const std::size_t z_cols = blocks.size() * h;
  const std::size_t rows = n + 2 * z_cols;
  const std::size_t cols = x_cols + z_cols + 2 * z_cols;

  LinearProgram lp;
  lp.nonhubs = n;
  lp.hubs = h;
  lp.program.objective.assign(cols, 0.0);
  lp.program.constraints = Matrix<double>(rows, cols);
  lp.program.rhs.assign(rows, 0.0);
  lp.columns.resize(cols);
  lp.row_names.resize(rows);

  auto& obj = lp.program.objective;
  auto& a = lp.program.constraints;

  for (std::size_t p = 0; p < n; ++p) {
    const double weight = inst.collection_weight(p);
    for (std::size_t i = 0; i < h; ++i) {
      const std::size_t col = lp.x_column(p, i);
      obj[col] = weight * inst.collection()(p, i);
      lp.columns[col] = {ColumnKind::x, p, i, 0};
      a(p, col) = 1.0;
    }
    lp.program.rhs[p] = 1.0;
    lp.row_names[p] = "assign_" + std::to_string(p);
  }

  std::size_t row = n;
  std::size_t slack = x_cols + z_cols;
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    const auto& blk = blocks[k];
    for (std::size_t i = 0; i < h; ++i) {
      const std::size_t z = x_cols + k * h + i;
      obj[z] = blk.weight * static_cast<double>(inst.spoke_length(i));
      lp.columns[z] = {ColumnKind::z, blk.p, blk.q, i};
      for (double sign : {1.0, -1.0}) {
        a(row, lp.x_column(blk.p, i)) = sign;
        a(row, lp.x_column(blk.q, i)) = -sign;
        a(row, z) = -1.0;
        a(row, slack) = 1.0;
        lp.columns[slack] = {ColumnKind::slack, row, 0, 0};
        lp.row_names[row] = std::string(sign > 0 ? "gap_pos_" : "gap_neg_") + std::to_string(blk.p) + "_" +
                            std::to_string(blk.q) + "_" + std::to_string(i);
        ++row;
        ++slack;
      }
    }
  }
  return lp;
}

// Relaxation objective of a row-stochastic x with Z set to |x_pk - x_qk|.
// Uses the LP's own coefficients, so it is consistent with the merged-pair
// convention.
inline double lrp_objective(const LinearProgram& lp, const Matrix<double>& x) {
  if (x.rows() != lp.nonhubs || x.cols() != lp.hubs)
    throw Error(ErrorKind::dimension_mismatch, "fractional solution shape does not match the LP");
  double total = 0.0;
  for (std::size_t col = 0; col < lp.columns.size(); ++col) {
    const auto& info = lp.columns[col];
    const double coef = lp.program.objective[col];
    if (coef == 0.0) continue;
    if (info.kind == ColumnKind::x) total += coef * x(info.a, info.b);
    else if (info.kind == ColumnKind::z) total += coef * std::abs(x(info.a, info.c) - x(info.b, info.c));
  }
  return total;
}

struct FractionalSolution {
  Matrix<double> x;  // n x h, row-stochastic
  double objective_value = 0.0;
  SolveStatus status = SolveStatus::optimal;
  std::size_t iterations = 0;
};

// Clamp to [0,1] and renormalize each row.
inline void project_rows(Matrix<double>& x) {
  for (std::size_t p = 0; p < x.rows(); ++p) {
    auto row = x.row(p);
    double sum = 0.0;
    for (auto& v : row) {
      v = std::clamp(v, 0.0, 1.0);
      sum += v;
    }
    if (sum <= 0.0) {
      for (auto& v : row) v = 1.0 / static_cast<double>(row.size());
    } else {
      for (auto& v : row) v /= sum;
    }
  }
}

inline FractionalSolution solve(const LinearProgram& lp, const SimplexOptions& options = {}) {
  const SimplexResult raw = solve_simplex(lp.program, options);
  if (raw.status == SolveStatus::infeasible || raw.status == SolveStatus::unbounded)
    throw Error(ErrorKind::internal_error,
                std::string("relaxation reported ") + to_string(raw.status) + "; it is always feasible and bounded");

  FractionalSolution sol;
  sol.status = raw.status;
  sol.iterations = raw.iterations;
  sol.x = Matrix<double>(lp.nonhubs, lp.hubs, 1.0 / static_cast<double>(lp.hubs));
  if (raw.feasible) {
    for (std::size_t col = 0; col < lp.columns.size(); ++col)
      if (lp.columns[col].kind == ColumnKind::x) sol.x(lp.columns[col].a, lp.columns[col].b) = raw.x[col];
    project_rows(sol.x);
  }
  sol.objective_value = lrp_objective(lp, sol.x);
  return sol;
}

inline FractionalSolution solve_lrp(const Instance& inst, const SimplexOptions& options = {}) {
  return solve(build_lrp(inst), options);
}

inline std::string column_name(const ColumnInfo& info) {
  switch (info.kind) {
    case ColumnKind::x: return "x_" + std::to_string(info.a) + "_" + std::to_string(info.b);
    case ColumnKind::z:
      return "z_" + std::to_string(info.a) + "_" + std::to_string(info.b) + "_" + std::to_string(info.c);
    case ColumnKind::slack: return "s_" + std::to_string(info.a);
  }
  return "col";
}

// CPLEX LP text format, for cross-checking with external solvers.
inline std::string write_lp_text(const LinearProgram& lp) {
  std::ostringstream out;
  auto term = [&](double coef, std::size_t col, bool& first) {
    if (coef == 0.0) return;
    out << (first ? " " : (coef < 0 ? " - " : " + "));
    if (first && coef < 0) out << "- ";
    first = false;
    const double mag = std::abs(coef);
    if (mag != 1.0) out << detail::format_real(mag) << ' ';
    out << column_name(lp.columns[col]);
  };

  out << "\\ star hub relaxation: " << lp.nonhubs << " non-hubs, " << lp.hubs << " hubs\n";
  out << "Minimize\n obj:";
  bool first = true;
  for (std::size_t j = 0; j < lp.columns.size(); ++j) term(lp.program.objective[j], j, first);
  if (first) out << " 0 " << column_name(lp.columns.front());
  out << "\nSubject To\n";
  const auto& a = lp.program.constraints;
  for (std::size_t r = 0; r < a.rows(); ++r) {
    out << ' ' << lp.row_names[r] << ':';
    first = true;
    for (std::size_t j = 0; j < a.cols(); ++j) term(a(r, j), j, first);
    out << " = " << detail::format_real(lp.program.rhs[r]) << '\n';
  }
  out << "End\n";
  return out.str();
}

}  // namespace starhub
