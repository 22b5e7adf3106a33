#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "starhub/error.hpp"
#include "starhub/instance.hpp"

namespace starhub {

struct ExactResult {
  Assignment assignment;
  double value = 0.0;
  std::uint64_t leaves = 0;  // complete assignments evaluated
};

inline constexpr std::uint64_t default_enumeration_limit = 100'000'000;

// h^n, saturating at limit + 1.
inline std::uint64_t enumeration_size(std::size_t hubs, std::size_t nonhubs, std::uint64_t limit) {
  std::uint64_t total = 1;
  for (std::size_t k = 0; k < nonhubs; ++k) {
    if (total > (limit + 1) / std::max<std::size_t>(hubs, 1)) return limit + 1;
    total *= hubs;
  }
  return total;
}

// Depth-first search over all allocations in lexicographic order with an
// incremental objective and a lower bound from the cheapest collection
// cost of every unplaced non-hub. Only strict improvements replace the
// incumbent, so the lexicographically first optimum wins.
inline ExactResult solve_exact(const Instance& inst, std::uint64_t limit = default_enumeration_limit) {
  const std::size_t n = inst.nonhub_count();
  const std::size_t h = inst.hub_count();
  if (enumeration_size(h, n, limit) > limit)
    throw Error(ErrorKind::limit_exceeded, "h^n = " + std::to_string(h) + "^" + std::to_string(n) +
                                               " exceeds the enumeration limit " + std::to_string(limit) +
                                               "; use the relaxation value as a lower bound instead");

  const StarMetric metric(inst);
  std::vector<double> placement(n * h);
  std::vector<double> tail_bound(n + 1, 0.0);
  for (std::size_t p = 0; p < n; ++p) {
    const double weight = inst.collection_weight(p);
    for (std::size_t i = 0; i < h; ++i) placement[p * h + i] = weight * inst.collection()(p, i);
  }
  for (std::size_t p = n; p-- > 0;) {
    const auto first = placement.begin() + static_cast<std::ptrdiff_t>(p * h);
    tail_bound[p] = tail_bound[p + 1] + *std::min_element(first, first + static_cast<std::ptrdiff_t>(h));
  }
  Matrix<double> pair(n, n);
  for (std::size_t p = 0; p < n; ++p)
    for (std::size_t q = 0; q < n; ++q)
      if (p != q) pair(p, q) = inst.pair_weight(p, q);

  ExactResult best;
  best.value = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> current(n, 0);
  std::vector<double> partial(n + 1, 0.0);

  auto improves = [&](double v) {
    if (std::isinf(best.value)) return true;
    return v < best.value - 1e-12 * std::max(1.0, std::abs(best.value));
  };

  // Iterative DFS: depth = number of placed non-hubs.
  std::size_t depth = 0;
  std::vector<std::size_t> next(n + 1, 0);
  while (true) {
    if (depth == n) {
      ++best.leaves;
      if (improves(partial[n])) {
        best.value = partial[n];
        best.assignment.target = current;
      }
      --depth;
      continue;
    }
    if (next[depth] == h) {
      if (depth == 0) break;
      next[depth] = 0;
      --depth;
      continue;
    }
    const std::size_t i = next[depth]++;
    double v = partial[depth] + placement[depth * h + i];
    for (std::size_t q = 0; q < depth; ++q) v += pair(depth, q) * metric(i, current[q]);
    if (!improves(v + tail_bound[depth + 1])) continue;
    current[depth] = i;
    partial[depth + 1] = v;
    ++depth;
  }
  best.value = evaluate_cost(inst, best.assignment);
  return best;
}

}  // namespace starhub
