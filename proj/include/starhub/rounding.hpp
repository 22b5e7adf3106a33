#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "starhub/error.hpp"
#include "starhub/hub_classing.hpp"
#include "starhub/instance.hpp"
#include "starhub/lp.hpp"
#include "starhub/matrix.hpp"
#include "starhub/random.hpp"

namespace starhub {

// r minimizing the guarantee (r-1)/ln r * (2 + (r^2+1)/(r^2-1)).
inline constexpr double default_ratio_base = 1.91065;

struct ClassPartition {
  std::vector<int> beta;                        // class of each non-hub
  std::vector<std::vector<std::size_t>> members;  // non-hubs per class, ascending
};

// Threshold rounding over the hub order: non-hub p joins the class of the
// first hub whose prefix mass exceeds U. One U serves every non-hub.
inline ClassPartition classify_nonhubs(const Matrix<double>& x, const HubClassing& hc, double threshold) {
  if (x.cols() != hc.hub_count()) throw Error(ErrorKind::dimension_mismatch, "x has the wrong number of hubs");
  if (!(threshold >= 0.0 && threshold < 1.0)) throw Error(ErrorKind::invalid_argument, "U must lie in [0,1)");
  ClassPartition part;
  part.beta.resize(x.rows());
  part.members.resize(static_cast<std::size_t>(hc.kappa_max) + 1);
  for (std::size_t p = 0; p < x.rows(); ++p) {
    double prefix = 0.0;
    std::size_t chosen = hc.hub_order.size();
    std::size_t last_positive = hc.hub_order.size();
    for (std::size_t k = 0; k < hc.hub_order.size(); ++k) {
      const double v = x(p, hc.hub_order[k]);
      if (v > 0.0) last_positive = k;
      prefix += v;
      if (threshold < prefix) {
        chosen = k;
        break;
      }
    }
    if (chosen == hc.hub_order.size()) {
      // Prefix sums fell short of U by rounding.
      if (last_positive == hc.hub_order.size())
        throw Error(ErrorKind::invalid_argument, "row " + std::to_string(p) + " of x has no positive entry");
      chosen = last_positive;
    }
    const int kappa = hc.alpha[hc.hub_order[chosen]];
    part.beta[p] = kappa;
    part.members[static_cast<std::size_t>(kappa)].push_back(p);
  }
  return part;
}

struct RoundingOptions {
  // Draw U from [0, m) where m is the largest x_pi over unassigned p and
  // class hubs i. Phases with U >= m assign nobody, so this only skips them.
  bool truncate_u = true;
  std::size_t phase_cap = 1'000'000;
};

struct RoundingPhase {
  int kappa = 0;
  std::size_t hub = 0;
  double threshold = 0.0;
  std::vector<std::size_t> assigned;
};

// Everything needed to reproduce one rounding: the draws that mattered and
// the final allocation. Phases that assigned nobody are not recorded.
struct RoundingTrace {
  std::uint64_t seed = 0;
  double lambda = 0.0;
  double class_threshold = 0.0;
  std::vector<RoundingPhase> phases;
  Assignment assignment;
};

namespace detail {

inline void check_class_support(const Matrix<double>& x, std::span<const std::size_t> hubs, std::size_t p,
                                int kappa) {
  double mass = 0.0;
  for (std::size_t i : hubs) mass += x(p, i);
  if (!(mass > 0.0))
    throw Error(ErrorKind::internal_error, "non-hub " + std::to_string(p) + " placed in class " +
                                               std::to_string(kappa) + " without fractional support there");
}

}  // namespace detail

// Per class: pick a class hub uniformly and a uniform U, and give that hub
// every unassigned member p with U <= x_pi. Repeat until the class is done.
inline RoundingTrace assign_within_classes(const Matrix<double>& x, const HubClassing& hc,
                                           const ClassPartition& part, Rng& rng,
                                           const RoundingOptions& options = {}) {
  constexpr std::size_t unassigned = std::numeric_limits<std::size_t>::max();
  RoundingTrace trace;
  trace.assignment.target.assign(x.rows(), unassigned);

  for (int kappa = 0; kappa <= hc.kappa_max; ++kappa) {
    const auto& members = part.members[static_cast<std::size_t>(kappa)];
    if (members.empty()) continue;
    const auto hubs = hc.hubs_in_class(kappa);
    for (std::size_t p : members) detail::check_class_support(x, hubs, p, kappa);

    std::vector<std::size_t> open = members;
    std::size_t phases = 0;
    while (!open.empty()) {
      if (++phases > options.phase_cap)
        throw Error(ErrorKind::internal_error, "class " + std::to_string(kappa) + " exceeded the phase cap");
      const std::size_t hub = hubs[rng.below(hubs.size())];
      double bound = 1.0;
      if (options.truncate_u) {
        bound = 0.0;
        for (std::size_t p : open)
          for (std::size_t i : hubs) bound = std::max(bound, x(p, i));
      }
      const double u = rng.uniform() * bound;

      RoundingPhase phase{kappa, hub, u, {}};
      std::erase_if(open, [&](std::size_t p) {
        const double v = x(p, hub);
        if (v > 0.0 && u <= v) {
          trace.assignment.target[p] = hub;
          phase.assigned.push_back(p);
          return true;
        }
        return false;
      });
      if (!phase.assigned.empty()) trace.phases.push_back(std::move(phase));
    }
  }
  for (std::size_t p = 0; p < x.rows(); ++p)
    if (trace.assignment.target[p] == unassigned)
      throw Error(ErrorKind::internal_error, "non-hub " + std::to_string(p) + " left unassigned");
  return trace;
}

// One rounding with lambda supplied by the caller.
inline RoundingTrace round_with_lambda(const Matrix<double>& x, std::span<const std::int64_t> lengths, double r,
                                       double lambda, std::uint64_t seed, const RoundingOptions& options = {}) {
  Rng rng(seed);
  const auto hc = classify_hubs(lengths, r, lambda);
  const double threshold = rng.uniform();
  const auto part = classify_nonhubs(x, hc, threshold);
  auto trace = assign_within_classes(x, hc, part, rng, options);
  trace.seed = seed;
  trace.lambda = lambda;
  trace.class_threshold = threshold;
  return trace;
}

// One full rounding: lambda, then U, then the intra-class phases, all from
// one stream seeded by `seed`.
inline RoundingTrace round_once(const Matrix<double>& x, std::span<const std::int64_t> lengths, double r,
                                std::uint64_t seed, const RoundingOptions& options = {}) {
  Rng rng(seed);
  const double lambda = rng.uniform();
  const auto hc = classify_hubs(lengths, r, lambda);
  const double threshold = rng.uniform();
  const auto part = classify_nonhubs(x, hc, threshold);
  auto trace = assign_within_classes(x, hc, part, rng, options);
  trace.seed = seed;
  trace.lambda = lambda;
  trace.class_threshold = threshold;
  return trace;
}

// Re-executes a trace without any randomness.
inline Assignment replay(const Matrix<double>& x, std::span<const std::int64_t> lengths, double r,
                         const RoundingTrace& trace) {
  constexpr std::size_t unassigned = std::numeric_limits<std::size_t>::max();
  const auto hc = classify_hubs(lengths, r, trace.lambda);
  const auto part = classify_nonhubs(x, hc, trace.class_threshold);
  Assignment out;
  out.target.assign(x.rows(), unassigned);
  for (const auto& phase : trace.phases) {
    for (std::size_t p : part.members[static_cast<std::size_t>(phase.kappa)]) {
      if (out.target[p] != unassigned) continue;
      const double v = x(p, phase.hub);
      if (v > 0.0 && phase.threshold <= v) out.target[p] = phase.hub;
    }
  }
  for (std::size_t p = 0; p < x.rows(); ++p)
    if (out.target[p] == unassigned)
      throw Error(ErrorKind::invalid_argument, "trace does not assign non-hub " + std::to_string(p));
  return out;
}

struct PipelineResult {
  FractionalSolution relaxation;
  Assignment best;
  double best_cost = 0.0;
  std::size_t best_trial = 0;
  std::vector<double> costs;  // one per trial, in trial order
};

// Solves the relaxation once, then rounds `trials` times with independent
// streams derived from `seed`. Keeps the cheapest allocation (earliest on
// ties).
inline PipelineResult run_pipeline(const Instance& inst, double r, std::size_t trials, std::uint64_t seed,
                                   const RoundingOptions& options = {}) {
  if (!(r > 1.0)) throw Error(ErrorKind::invalid_argument, "r must exceed 1");
  if (trials < 1) throw Error(ErrorKind::invalid_argument, "at least one trial is required");
  PipelineResult result;
  result.relaxation = solve_lrp(inst);
  if (result.relaxation.status != SolveStatus::optimal)
    throw Error(ErrorKind::limit_exceeded,
                std::string("relaxation solver stopped: ") + to_string(result.relaxation.status));
  result.costs.reserve(trials);
  for (std::size_t t = 0; t < trials; ++t) {
    const auto trace = round_once(result.relaxation.x, inst.spoke_lengths(), r, derive_seed(seed, t), options);
    const double cost = evaluate_cost(inst, trace.assignment);
    result.costs.push_back(cost);
    if (t == 0 || cost < result.best_cost) {
      result.best_cost = cost;
      result.best = trace.assignment;
      result.best_trial = t;
    }
  }
  return result;
}

}  // namespace starhub
