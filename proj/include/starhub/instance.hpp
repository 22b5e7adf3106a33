#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <iostream>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "starhub/error.hpp"
#include "starhub/matrix.hpp"
#include "starhub/random.hpp"

namespace starhub {

// A star-star hub network: h hubs hanging off a central depot by spokes of
// integer length, n non-hubs with per-hub collection costs, and a flow
// demand between every ordered pair of non-hubs.
//
// Hubs are stored in canonical order (non-decreasing spoke length, stable
// with respect to the input order). hub_ids()[k] is the external index of
// canonical hub k, so callers can translate assignments back.
class Instance {
 public:
  Instance() = default;

  // Validates and canonicalizes. collection is n x h, flows is n x n.
  // hub_ids may be empty, meaning the input order is the external order.
  static Instance make(std::vector<std::int64_t> spoke_lengths, Matrix<double> collection,
                       Matrix<double> flows, std::vector<std::size_t> hub_ids = {}) {
    const std::size_t h = spoke_lengths.size();
    if (h == 0) throw Error(ErrorKind::invariant_violation, "instance needs at least one hub");
    const std::size_t n = flows.rows();
    if (n == 0) throw Error(ErrorKind::invariant_violation, "instance needs at least one non-hub");
    if (flows.cols() != n)
      throw Error(ErrorKind::dimension_mismatch, "flow matrix must be n x n");
    if (collection.rows() != n || collection.cols() != h)
      throw Error(ErrorKind::dimension_mismatch, "collection cost matrix must be n x h");
    if (hub_ids.empty()) {
      hub_ids.resize(h);
      std::iota(hub_ids.begin(), hub_ids.end(), std::size_t{0});
    }
    if (hub_ids.size() != h) throw Error(ErrorKind::dimension_mismatch, "hub id list must have h entries");

    for (std::size_t i = 0; i < h; ++i)
      if (spoke_lengths[i] < 0)
        throw Error(ErrorKind::invariant_violation,
                    "spoke length of hub " + std::to_string(i) + " is negative");
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t i = 0; i < h; ++i)
        if (!(collection(p, i) >= 0.0) || !std::isfinite(collection(p, i)))
          throw Error(ErrorKind::invariant_violation, "collection cost c[" + std::to_string(p) + "][" +
                                                          std::to_string(i) + "] must be finite and >= 0");
      for (std::size_t q = 0; q < n; ++q)
        if (!(flows(p, q) >= 0.0) || !std::isfinite(flows(p, q)))
          throw Error(ErrorKind::invariant_violation, "flow w[" + std::to_string(p) + "][" +
                                                          std::to_string(q) + "] must be finite and >= 0");
      if (flows(p, p) != 0.0)
        throw Error(ErrorKind::invariant_violation, "self flow w[" + std::to_string(p) + "][" +
                                                        std::to_string(p) + "] must be 0");
    }

    std::vector<std::size_t> order(h);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return spoke_lengths[a] < spoke_lengths[b]; });

    Instance inst;
    inst.spoke_lengths_.resize(h);
    inst.hub_ids_.resize(h);
    inst.collection_ = Matrix<double>(n, h);
    for (std::size_t k = 0; k < h; ++k) {
      inst.spoke_lengths_[k] = spoke_lengths[order[k]];
      inst.hub_ids_[k] = hub_ids[order[k]];
      for (std::size_t p = 0; p < n; ++p) inst.collection_(p, k) = collection(p, order[k]);
    }
    inst.flows_ = std::move(flows);
    return inst;
  }

  std::size_t hub_count() const noexcept { return spoke_lengths_.size(); }
  std::size_t nonhub_count() const noexcept { return flows_.rows(); }

  const std::vector<std::int64_t>& spoke_lengths() const noexcept { return spoke_lengths_; }
  std::int64_t spoke_length(std::size_t hub) const { return spoke_lengths_[hub]; }
  const Matrix<double>& collection() const noexcept { return collection_; }
  const Matrix<double>& flows() const noexcept { return flows_; }
  const std::vector<std::size_t>& hub_ids() const noexcept { return hub_ids_; }

  // Flow of the unordered pair {p, q}: w_pq + w_qp.
  double pair_weight(std::size_t p, std::size_t q) const { return flows_(p, q) + flows_(q, p); }

  // Total flow touching p; the coefficient of c_pi in the objective.
  double collection_weight(std::size_t p) const {
    double s = 0.0;
    for (std::size_t q = 0; q < nonhub_count(); ++q)
      if (q != p) s += pair_weight(p, q);
    return s;
  }

  friend bool operator==(const Instance&, const Instance&) = default;

 private:
  std::vector<std::int64_t> spoke_lengths_;
  Matrix<double> collection_;
  Matrix<double> flows_;
  std::vector<std::size_t> hub_ids_;
};

// Hub-to-hub cost of a star: l_i + l_j off the diagonal, 0 on it.
class StarMetric {
 public:
  explicit StarMetric(const Instance& inst) : lengths_(inst.spoke_lengths()) {}
  explicit StarMetric(std::vector<std::int64_t> lengths) : lengths_(std::move(lengths)) {}

  std::size_t size() const noexcept { return lengths_.size(); }

  double operator()(std::size_t i, std::size_t j) const {
    return i == j ? 0.0 : static_cast<double>(lengths_[i] + lengths_[j]);
  }

  Matrix<double> matrix() const {
    Matrix<double> m(size(), size());
    for (std::size_t i = 0; i < size(); ++i)
      for (std::size_t j = 0; j < size(); ++j) m(i, j) = (*this)(i, j);
    return m;
  }

 private:
  std::vector<std::int64_t> lengths_;
};

// target[p] is the canonical hub index non-hub p is allocated to.
struct Assignment {
  std::vector<std::size_t> target;

  friend bool operator==(const Assignment&, const Assignment&) = default;
};

inline void check_assignment(const Instance& inst, const Assignment& a) {
  if (a.target.size() != inst.nonhub_count())
    throw Error(ErrorKind::dimension_mismatch, "assignment has " + std::to_string(a.target.size()) +
                                                   " entries, instance has " +
                                                   std::to_string(inst.nonhub_count()) + " non-hubs");
  for (std::size_t p = 0; p < a.target.size(); ++p)
    if (a.target[p] >= inst.hub_count())
      throw Error(ErrorKind::dimension_mismatch,
                  "non-hub " + std::to_string(p) + " assigned to unknown hub " + std::to_string(a.target[p]));
}

// Objective of an integral allocation, summed over ordered pairs p != q.
inline double evaluate_cost(const Instance& inst, const Assignment& a) {
  check_assignment(inst, a);
  const StarMetric metric(inst);
  const auto& c = inst.collection();
  const auto& w = inst.flows();
  double total = 0.0;
  for (std::size_t p = 0; p < inst.nonhub_count(); ++p) {
    for (std::size_t q = 0; q < inst.nonhub_count(); ++q) {
      if (p == q || w(p, q) == 0.0) continue;
      const std::size_t i = a.target[p];
      const std::size_t j = a.target[q];
      total += w(p, q) * (c(p, i) + c(q, j) + metric(i, j));
    }
  }
  return total;
}

// Canonical hub indices -> external hub ids.
inline std::vector<std::size_t> to_external(const Instance& inst, const Assignment& a) {
  check_assignment(inst, a);
  std::vector<std::size_t> out(a.target.size());
  for (std::size_t p = 0; p < out.size(); ++p) out[p] = inst.hub_ids()[a.target[p]];
  return out;
}

inline Assignment from_external(const Instance& inst, const std::vector<std::size_t>& external) {
  std::vector<std::size_t> to_canonical(inst.hub_count());
  for (std::size_t k = 0; k < inst.hub_count(); ++k) to_canonical[inst.hub_ids()[k]] = k;
  Assignment a;
  a.target.reserve(external.size());
  for (std::size_t id : external) {
    if (id >= inst.hub_count()) throw Error(ErrorKind::dimension_mismatch, "unknown hub id " + std::to_string(id));
    a.target.push_back(to_canonical[id]);
  }
  check_assignment(inst, a);
  return a;
}

struct GeneratorParams {
  std::uint64_t seed = 1;
  std::size_t nonhubs = 5;
  std::size_t hubs = 4;
  std::int64_t ell_max = 20;
  double c_max = 10.0;
  double w_max = 5.0;
  double density = 1.0;  // fraction of ordered pairs (p != q) with positive flow
};

// Deterministic per seed. Out-of-range parameters are clamped with a
// warning on std::clog.
inline Instance generate_random(GeneratorParams params) {
  auto warn = [](const std::string& msg) { std::clog << "warning: generate_random: " << msg << '\n'; };
  if (params.nonhubs < 1) { warn("nonhubs clamped to 1"); params.nonhubs = 1; }
  if (params.hubs < 1) { warn("hubs clamped to 1"); params.hubs = 1; }
  if (params.ell_max < 0) { warn("ell_max clamped to 0"); params.ell_max = 0; }
  if (!(params.c_max >= 0.0)) { warn("c_max clamped to 0"); params.c_max = 0.0; }
  if (!(params.w_max > 0.0)) { warn("w_max clamped to 1"); params.w_max = 1.0; }
  if (!(params.density >= 0.0)) { warn("density clamped to 0"); params.density = 0.0; }
  if (params.density > 1.0) { warn("density clamped to 1"); params.density = 1.0; }

  Rng rng(params.seed);
  const std::size_t n = params.nonhubs;
  const std::size_t h = params.hubs;

  std::vector<std::int64_t> ell(h);
  for (auto& v : ell) v = static_cast<std::int64_t>(rng.below(static_cast<std::size_t>(params.ell_max) + 1));
  std::sort(ell.begin(), ell.end());

  Matrix<double> c(n, h);
  for (std::size_t p = 0; p < n; ++p)
    for (std::size_t i = 0; i < h; ++i) c(p, i) = rng.uniform(0.0, params.c_max);

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t p = 0; p < n; ++p)
    for (std::size_t q = 0; q < n; ++q)
      if (p != q) pairs.emplace_back(p, q);
  // Partial Fisher-Yates: the first `active` pairs get positive flow.
  const auto active = static_cast<std::size_t>(std::llround(params.density * static_cast<double>(pairs.size())));
  for (std::size_t k = 0; k < active; ++k) std::swap(pairs[k], pairs[k + rng.below(pairs.size() - k)]);

  Matrix<double> w(n, n);
  for (std::size_t k = 0; k < active; ++k) {
    // (0, w_max]: flip the half-open draw so zero cannot occur.
    w(pairs[k].first, pairs[k].second) = params.w_max * (1.0 - rng.uniform());
  }
  return Instance::make(std::move(ell), std::move(c), std::move(w));
}

}  // namespace starhub
