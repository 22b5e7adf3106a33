#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "starhub/error.hpp"
#include "starhub/matrix.hpp"

namespace starhub {

// min objective . x  s.t.  constraints * x = rhs,  x >= 0
struct EqualityLp {
  std::vector<double> objective;
  Matrix<double> constraints;
  std::vector<double> rhs;

  std::size_t rows() const noexcept { return constraints.rows(); }
  std::size_t cols() const noexcept { return constraints.cols(); }
};

enum class SolveStatus { optimal, infeasible, unbounded, iteration_limit };

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::infeasible: return "infeasible";
    case SolveStatus::unbounded: return "unbounded";
    case SolveStatus::iteration_limit: return "iteration-limit";
  }
  return "unknown";
}

struct SimplexOptions {
  double pivot_tolerance = 1e-9;
  double optimality_tolerance = 1e-9;
  double feasibility_tolerance = 1e-7;
  std::size_t bland_after_degenerate = 50;
  std::size_t iteration_factor = 50;  // cap = factor * (rows + cols)
};

struct SimplexResult {
  SolveStatus status = SolveStatus::infeasible;
  std::vector<double> x;
  double objective = 0.0;
  std::size_t iterations = 0;
  bool feasible = false;  // x satisfies the constraints (phase 1 completed)
};

namespace detail {

// Dense tableau for the two-phase primal simplex. Column layout: original
// columns, then artificials, then the right-hand side.
class Tableau {
 public:
  Tableau(const EqualityLp& lp, const SimplexOptions& opt) : opt_(opt), n_(lp.cols()) {
    const std::size_t m = lp.rows();
    if (lp.objective.size() != n_ || lp.rhs.size() != m)
      throw Error(ErrorKind::dimension_mismatch, "simplex: objective/rhs sizes do not match constraint matrix");

    // Rows with negative rhs are negated so the initial basis is feasible.
    Matrix<double> a = lp.constraints;
    std::vector<double> b = lp.rhs;
    for (std::size_t r = 0; r < m; ++r) {
      if (!std::isfinite(b[r])) throw Error(ErrorKind::invalid_argument, "simplex: non-finite rhs");
      if (b[r] < 0.0) {
        b[r] = -b[r];
        for (auto& v : a.row(r)) v = -v;
      }
    }

    // Reuse unit columns (slacks) as starting basis; artificials elsewhere.
    basis_.assign(m, npos);
    std::vector<std::size_t> nonzeros(n_, 0);
    std::vector<std::size_t> unit_row(n_, npos);
    for (std::size_t r = 0; r < m; ++r)
      for (std::size_t j = 0; j < n_; ++j)
        if (a(r, j) != 0.0) {
          ++nonzeros[j];
          unit_row[j] = a(r, j) == 1.0 ? r : npos;
        }
    for (std::size_t j = 0; j < n_; ++j)
      if (nonzeros[j] == 1 && unit_row[j] != npos && basis_[unit_row[j]] == npos) basis_[unit_row[j]] = j;

    std::size_t artificials = 0;
    for (std::size_t r = 0; r < m; ++r)
      if (basis_[r] == npos) ++artificials;
    width_ = n_ + artificials + 1;
    t_ = Matrix<double>(m, width_);
    std::size_t next_art = n_;
    for (std::size_t r = 0; r < m; ++r) {
      for (std::size_t j = 0; j < n_; ++j) t_(r, j) = a(r, j);
      t_(r, width_ - 1) = b[r];
      if (basis_[r] == npos) {
        t_(r, next_art) = 1.0;
        basis_[r] = next_art++;
      }
    }
    allowed_.assign(width_ - 1, true);
    objective_.assign(width_, 0.0);
  }

  std::size_t rows() const noexcept { return t_.rows(); }
  bool has_artificials() const noexcept { return width_ - 1 > n_; }
  bool is_artificial(std::size_t j) const noexcept { return j >= n_ && j < width_ - 1; }

  // Installs a cost vector (over all columns but rhs) and prices it out.
  void set_costs(const std::vector<double>& cost) {
    std::fill(objective_.begin(), objective_.end(), 0.0);
    for (std::size_t j = 0; j < cost.size(); ++j) objective_[j] = cost[j];
    for (std::size_t r = 0; r < rows(); ++r) {
      const double cb = cost[basis_[r]];
      if (cb == 0.0) continue;
      for (std::size_t j = 0; j < width_; ++j) objective_[j] -= cb * t_(r, j);
    }
  }

  // Phase-1 cost: one per artificial.
  std::vector<double> artificial_costs() const {
    std::vector<double> cost(width_ - 1, 0.0);
    for (std::size_t j = n_; j < width_ - 1; ++j) cost[j] = 1.0;
    return cost;
  }

  // Current objective value (the rhs cell of the cost row holds -value).
  double value() const { return -objective_[width_ - 1]; }

  // Runs primal simplex on the installed costs. Returns optimal, unbounded
  // or iteration_limit.
  SolveStatus iterate(std::size_t& iterations, std::size_t cap) {
    std::size_t degenerate_streak = 0;
    while (true) {
      if (iterations >= cap) return SolveStatus::iteration_limit;
      const bool bland = degenerate_streak >= opt_.bland_after_degenerate;

      std::size_t enter = npos;
      double best = -opt_.optimality_tolerance;
      for (std::size_t j = 0; j + 1 < width_; ++j) {
        if (!allowed_[j]) continue;
        const double d = objective_[j];
        if (bland) {
          if (d < -opt_.optimality_tolerance) { enter = j; break; }
        } else if (d < best) {
          best = d;
          enter = j;
        }
      }
      if (enter == npos) return SolveStatus::optimal;

      std::size_t leave = npos;
      double ratio = std::numeric_limits<double>::infinity();
      for (std::size_t r = 0; r < rows(); ++r) {
        const double a = t_(r, enter);
        if (a <= opt_.pivot_tolerance) continue;
        const double q = t_(r, width_ - 1) / a;
        bool take = false;
        if (leave == npos || q < ratio - 1e-12) {
          take = true;
        } else if (q <= ratio + 1e-12) {
          // Bland: lowest basic index. Otherwise: largest pivot for stability.
          take = bland ? basis_[r] < basis_[leave] : a > t_(leave, enter);
        }
        if (take) {
          leave = r;
          ratio = q;
        }
      }
      if (leave == npos) return SolveStatus::unbounded;

      degenerate_streak = ratio <= 1e-12 ? degenerate_streak + 1 : 0;
      pivot(leave, enter);
      ++iterations;
    }
  }

  // After phase 1: pivot artificials out of the basis where possible and
  // drop rows that turned out redundant.
  void expel_artificials() {
    for (std::size_t r = 0; r < rows();) {
      if (!is_artificial(basis_[r])) { ++r; continue; }
      std::size_t col = npos;
      double best = opt_.pivot_tolerance;
      for (std::size_t j = 0; j < n_; ++j) {
        if (std::abs(t_(r, j)) > best) {
          best = std::abs(t_(r, j));
          col = j;
        }
      }
      if (col != npos) {
        pivot(r, col);
        ++r;
      } else {
        drop_row(r);
      }
    }
    for (std::size_t j = n_; j + 1 < width_; ++j) allowed_[j] = false;
  }

  std::vector<double> primal() const {
    std::vector<double> x(n_, 0.0);
    for (std::size_t r = 0; r < rows(); ++r)
      if (basis_[r] < n_) x[basis_[r]] = std::max(0.0, t_(r, width_ - 1));
    return x;
  }

 private:
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  void pivot(std::size_t pr, std::size_t pc) {
    const double inv = 1.0 / t_(pr, pc);
    auto prow = t_.row(pr);
    for (auto& v : prow) v *= inv;
    prow[pc] = 1.0;
    for (std::size_t r = 0; r < rows(); ++r) {
      if (r == pr) continue;
      const double f = t_(r, pc);
      if (f == 0.0) continue;
      auto row = t_.row(r);
      for (std::size_t j = 0; j < width_; ++j) row[j] -= f * prow[j];
      row[pc] = 0.0;
    }
    const double f = objective_[pc];
    if (f != 0.0) {
      for (std::size_t j = 0; j < width_; ++j) objective_[j] -= f * prow[j];
      objective_[pc] = 0.0;
    }
    basis_[pr] = pc;
  }

  void drop_row(std::size_t r) {
    Matrix<double> next(rows() - 1, width_);
    for (std::size_t i = 0, k = 0; i < rows(); ++i) {
      if (i == r) continue;
      std::copy(t_.row(i).begin(), t_.row(i).end(), next.row(k).begin());
      ++k;
    }
    t_ = std::move(next);
    basis_.erase(basis_.begin() + static_cast<std::ptrdiff_t>(r));
  }

  SimplexOptions opt_;
  std::size_t n_;
  std::size_t width_ = 0;
  Matrix<double> t_;
  std::vector<std::size_t> basis_;
  std::vector<bool> allowed_;
  std::vector<double> objective_;
};

}  // namespace detail

// Two-phase dense primal simplex. Dantzig pricing, switching to Bland's
// rule after a streak of degenerate pivots.
inline SimplexResult solve_simplex(const EqualityLp& lp, const SimplexOptions& opt = {}) {
  detail::Tableau tab(lp, opt);
  SimplexResult result;
  const std::size_t cap = opt.iteration_factor * (lp.rows() + lp.cols());

  if (tab.has_artificials()) {
    tab.set_costs(tab.artificial_costs());
    const SolveStatus s = tab.iterate(result.iterations, cap);
    if (s == SolveStatus::iteration_limit) {
      result.status = s;
      return result;
    }
    double scale = 1.0;
    for (double b : lp.rhs) scale = std::max(scale, std::abs(b));
    if (tab.value() > opt.feasibility_tolerance * scale) {
      result.status = SolveStatus::infeasible;
      return result;
    }
    tab.expel_artificials();
  }

  tab.set_costs(lp.objective);
  result.status = tab.iterate(result.iterations, cap);
  result.feasible = true;
  result.x = tab.primal();
  result.objective = 0.0;
  for (std::size_t j = 0; j < result.x.size(); ++j) result.objective += lp.objective[j] * result.x[j];
  return result;
}

}  // namespace starhub
