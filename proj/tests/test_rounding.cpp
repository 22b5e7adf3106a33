#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "oracles.hpp"
#include "starhub/hub_classing.hpp"
#include "starhub/lp.hpp"
#include "starhub/rounding.hpp"

using namespace starhub;

namespace {

Matrix<double> rows_of(std::vector<std::vector<double>> v) {
  Matrix<double> m(v.size(), v.front().size());
  for (std::size_t r = 0; r < v.size(); ++r)
    for (std::size_t c = 0; c < v[r].size(); ++c) m(r, c) = v[r][c];
  return m;
}

}  // namespace

TEST(ClassifyHubs, ZeroSpokeIsClassZero) {
  const std::vector<std::int64_t> ell{0, 0, 5};
  const auto hc = classify_hubs(ell, 2.0, 0.3);
  EXPECT_EQ(hc.alpha[0], 0);
  EXPECT_EQ(hc.u[0], 0.0);
  EXPECT_EQ(hc.alpha[1], 0);
  EXPECT_GT(hc.alpha[2], 0);
}

TEST(ClassifyHubs, UnitSpokeAtZeroShiftSkipsEmptyClassOne) {
  // Class 1 is [1, r^0) = [1, 1), empty; l = 1 lands in class 2 = [1, 2).
  const std::vector<std::int64_t> ell{1, 1};
  const auto hc = classify_hubs(ell, 2.0, 0.0);
  EXPECT_EQ(hc.alpha[0], 2);
  EXPECT_EQ(hc.alpha[1], 2);
  EXPECT_DOUBLE_EQ(hc.u[0], 2.0);
}

TEST(ClassifyHubs, ScanAgreesWithClosedForm) {
  const std::vector<std::int64_t> ell{1, 3, 50};
  const auto hc = classify_hubs(ell, 1.91065, 0.5);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(hc.alpha[i], oracle::closed_form_class(ell[i], 1.91065, 0.5));
  // Hand check: log_r 50 = 6.0358..., minus 0.5, floor 5, plus 2.
  EXPECT_EQ(hc.alpha[2], 7);
  EXPECT_EQ(hc.alpha[0], 1);  // 1 < r^0.5
}

TEST(ClassifyHubs, ScanAgreesWithClosedFormAwayFromBoundaries) {
  Rng rng(8);
  int compared = 0;
  for (int trial = 0; trial < 2000; ++trial) {
    const double r = 1.05 + 4.0 * rng.uniform();
    const double lambda = rng.uniform();
    const auto l = static_cast<std::int64_t>(1 + rng.below(5000));
    const double pos = std::log(static_cast<double>(l)) / std::log(r) - lambda;
    if (std::abs(pos - std::round(pos)) < 1e-9) continue;
    EXPECT_EQ(hub_class(l, r, lambda), oracle::closed_form_class(l, r, lambda));
    ++compared;
  }
  EXPECT_GT(compared, 1900);
}

TEST(ClassifyHubs, InvariantsHoldForRandomDraws) {
  Rng rng(21);
  for (int trial = 0; trial < 300; ++trial) {
    const double r = 1.1 + 3.0 * rng.uniform();
    const double lambda = rng.uniform();
    std::vector<std::int64_t> ell(1 + rng.below(8));
    for (auto& v : ell) v = static_cast<std::int64_t>(rng.below(200));
    std::sort(ell.begin(), ell.end());
    const auto hc = classify_hubs(ell, r, lambda);

    for (std::size_t i = 0; i < ell.size(); ++i) {
      EXPECT_EQ(hc.alpha[i] == 0, ell[i] == 0);
      if (ell[i] >= 1) {
        const double l = static_cast<double>(ell[i]);
        const int k = hc.alpha[i];
        EXPECT_LE(std::pow(r, std::max(k - 2 + lambda, 0.0)), l * (1 + 1e-12));
        EXPECT_LT(l, std::pow(r, k - 1 + lambda));
        EXPECT_LT(l, hc.u[i]);
        EXPECT_LE(hc.u[i], r * l * (1 + 1e-12));
      }
      if (i > 0) {
        EXPECT_LE(hc.alpha[i - 1], hc.alpha[i]);
      }
    }

    // Hub order: each class contiguous, in class_order, ascending length.
    ASSERT_EQ(hc.hub_order.size(), ell.size());
    std::size_t pos = 0;
    for (int kappa : hc.class_order)
      while (pos < hc.hub_order.size() && hc.alpha[hc.hub_order[pos]] == kappa) {
        if (pos > 0 && hc.alpha[hc.hub_order[pos - 1]] == kappa) {
          const auto prev = hc.hub_order[pos - 1], cur = hc.hub_order[pos];
          EXPECT_TRUE(ell[prev] < ell[cur] || (ell[prev] == ell[cur] && prev < cur));
        }
        ++pos;
      }
    EXPECT_EQ(pos, hc.hub_order.size());
  }
}

TEST(ClassifyHubs, ClassOrderParityRule) {
  EXPECT_EQ(class_label_order(0), (std::vector<int>{0}));
  EXPECT_EQ(class_label_order(1), (std::vector<int>{0, 1}));
  EXPECT_EQ(class_label_order(3), (std::vector<int>{2, 0, 1, 3}));
  EXPECT_EQ(class_label_order(4), (std::vector<int>{4, 2, 0, 1, 3}));
  EXPECT_EQ(class_label_order(7), (std::vector<int>{6, 4, 2, 0, 1, 3, 5, 7}));
}

TEST(ClassifyHubs, RejectsBadParameters) {
  const std::vector<std::int64_t> ell{1};
  EXPECT_THROW(classify_hubs(ell, 1.0, 0.5), Error);
  EXPECT_THROW(classify_hubs(ell, 2.0, 1.0), Error);
  EXPECT_THROW(classify_hubs(ell, 2.0, -0.1), Error);
}

TEST(ExpectedScale, QuadratureMatchesClosedForm) {
  // E[u] / l = integral_0^1 r^t dt; composite Simpson with 2000 panels.
  for (double r : {1.1, default_ratio_base, 3.0, 10.0}) {
    const int panels = 2000;
    double s = 0.0;
    for (int k = 0; k <= panels; ++k) {
      const double t = static_cast<double>(k) / panels;
      const double wgt = (k == 0 || k == panels) ? 1.0 : (k % 2 ? 4.0 : 2.0);
      s += wgt * std::pow(r, t);
    }
    s /= 3.0 * panels;
    EXPECT_NEAR(s, (r - 1.0) / std::log(r), 1e-6 * (r - 1.0) / std::log(r));
  }
}

TEST(ClassifyNonhubs, IntegralRowsFollowTheirHub) {
  const std::vector<std::int64_t> ell{0, 2, 5, 40};
  const auto hc = classify_hubs(ell, 2.0, 0.4);
  const auto x = rows_of({{0, 1, 0, 0}, {0, 0, 0, 1}, {1, 0, 0, 0}});
  for (double u : {0.0, 0.3, 0.999}) {
    const auto part = classify_nonhubs(x, hc, u);
    EXPECT_EQ(part.beta[0], hc.alpha[1]);
    EXPECT_EQ(part.beta[1], hc.alpha[3]);
    EXPECT_EQ(part.beta[2], hc.alpha[0]);
  }
}

TEST(ClassifyNonhubs, ZeroThresholdPicksFirstSupportedHub) {
  const std::vector<std::int64_t> ell{0, 2, 5, 40};
  const auto hc = classify_hubs(ell, 2.0, 0.4);
  const auto x = rows_of({{0.25, 0.25, 0.25, 0.25}, {0, 0, 0.5, 0.5}});
  const auto part = classify_nonhubs(x, hc, 0.0);
  for (std::size_t p = 0; p < 2; ++p) {
    std::size_t first = 0;
    while (x(p, hc.hub_order[first]) == 0.0) ++first;
    EXPECT_EQ(part.beta[p], hc.alpha[hc.hub_order[first]]);
  }
}

TEST(ClassifyNonhubs, IdenticalRowsShareAClass) {
  Rng rng(4);
  const std::vector<std::int64_t> ell{0, 1, 3, 9, 30};
  for (int trial = 0; trial < 500; ++trial) {
    const auto hc = classify_hubs(ell, default_ratio_base, rng.uniform());
    const auto row = oracle::double_distribution(rng, 5);
    Matrix<double> x(3, 5);
    for (std::size_t p = 0; p < 3; ++p)
      for (std::size_t i = 0; i < 5; ++i) x(p, i) = p == 1 ? oracle::double_distribution(rng, 5)[i] : row[i];
    const auto part = classify_nonhubs(x, hc, rng.uniform());
    EXPECT_EQ(part.beta[0], part.beta[2]);
  }
}

TEST(ClassifyNonhubs, ShortfallFallsBackToLastSupportedHub) {
  const std::vector<std::int64_t> ell{2, 2};
  const auto hc = classify_hubs(ell, 2.0, 0.0);
  // Row sums to slightly under the threshold.
  const auto x = rows_of({{0.5, 0.4999999999}});
  const auto part = classify_nonhubs(x, hc, 0.99999999999);
  EXPECT_EQ(part.beta[0], hc.alpha[1]);
}

TEST(AssignWithinClasses, SingleHubClassIsDeterministic) {
  const std::vector<std::int64_t> ell{0, 7};
  const auto hc = classify_hubs(ell, 2.0, 0.5);
  const auto x = rows_of({{0.2, 0.8}, {0.9, 0.1}, {0.05, 0.95}});
  ClassPartition part;
  part.beta = {hc.alpha[1], hc.alpha[1], hc.alpha[1]};
  part.members.resize(static_cast<std::size_t>(hc.kappa_max) + 1);
  part.members[static_cast<std::size_t>(hc.alpha[1])] = {0, 1, 2};
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed);
    const auto trace = assign_within_classes(x, hc, part, rng);
    EXPECT_EQ(trace.assignment.target, (std::vector<std::size_t>{1, 1, 1}));
  }
}

TEST(AssignWithinClasses, IntegralRowsAreKept) {
  const std::vector<std::int64_t> ell{3, 3, 3, 3};
  const auto x = rows_of({{0, 0, 1, 0}, {1, 0, 0, 0}, {0, 0, 0, 1}});
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto trace = round_once(x, ell, 2.0, seed);
    EXPECT_EQ(trace.assignment.target, (std::vector<std::size_t>{2, 0, 3}));
  }
}

TEST(AssignWithinClasses, RejectsUnsupportedMembers) {
  const std::vector<std::int64_t> ell{0, 7};
  const auto hc = classify_hubs(ell, 2.0, 0.5);
  const auto x = rows_of({{1.0, 0.0}});
  ClassPartition part;
  part.beta = {hc.alpha[1]};
  part.members.resize(static_cast<std::size_t>(hc.kappa_max) + 1);
  part.members[static_cast<std::size_t>(hc.alpha[1])] = {0};
  Rng rng(1);
  EXPECT_THROW(assign_within_classes(x, hc, part, rng), Error);
}

TEST(AssignWithinClasses, SingleNonhubMarginalMatchesBinomial) {
  // Both hubs in one class; Pr[hub 0] must be 0.3.
  const std::vector<std::int64_t> ell{4, 4};
  const auto x = rows_of({{0.3, 0.7}});
  const std::size_t trials = 100'000;
  std::size_t hits = 0;
  for (std::size_t t = 0; t < trials; ++t) hits += round_once(x, ell, 2.0, derive_seed(77, t)).assignment.target[0] == 0;
  const double freq = static_cast<double>(hits) / trials;
  EXPECT_NEAR(freq, 0.3, 3.0 * std::sqrt(0.3 * 0.7 / trials));
}

TEST(AssignWithinClasses, TruncatedThresholdPreservesDistribution) {
  // Chi-squared two-sample test on the joint allocation of three non-hubs.
  const std::vector<std::int64_t> ell{5, 5, 6};
  const auto x = rows_of({{0.5, 0.3, 0.2}, {0.1, 0.6, 0.3}, {0.2, 0.2, 0.6}});
  const auto hc = classify_hubs(ell, 2.0, 0.25);
  ASSERT_EQ(hc.kappa_max, hc.alpha[0]);
  ASSERT_EQ(hc.alpha[0], hc.alpha[2]);

  auto histogram = [&](bool truncate, std::uint64_t seed) {
    std::map<std::vector<std::size_t>, double> counts;
    RoundingOptions opt;
    opt.truncate_u = truncate;
    for (std::size_t t = 0; t < 10'000; ++t)
      counts[round_with_lambda(x, ell, 2.0, 0.25, derive_seed(seed, t), opt).assignment.target] += 1.0;
    return counts;
  };
  auto on = histogram(true, 1);
  auto off = histogram(false, 2);
  std::map<std::vector<std::size_t>, std::pair<double, double>> cells;
  for (auto& [k, v] : on) cells[k].first = v;
  for (auto& [k, v] : off) cells[k].second = v;
  double chi2 = 0.0;
  for (auto& [k, v] : cells) {
    const double total = v.first + v.second;
    if (total == 0.0) continue;
    chi2 += (v.first - v.second) * (v.first - v.second) / total;  // equal sample sizes
  }
  const double dof = static_cast<double>(cells.size()) - 1.0;
  // 27 cells at most; 99.9% quantile of chi^2_26 is 54.05.
  ASSERT_LE(dof, 26.0);
  EXPECT_LT(chi2, 54.05) << "dof " << dof;
}

TEST(RoundingTrace, ReplayReproducesAssignment) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    GeneratorParams params;
    params.seed = seed;
    params.nonhubs = 6;
    params.hubs = 5;
    params.ell_max = 40;
    const auto inst = generate_random(params);
    const auto x = solve_lrp(inst).x;
    for (bool truncate : {true, false}) {
      RoundingOptions opt;
      opt.truncate_u = truncate;
      const auto trace = round_once(x, inst.spoke_lengths(), default_ratio_base, seed * 31, opt);
      EXPECT_EQ(replay(x, inst.spoke_lengths(), default_ratio_base, trace), trace.assignment);
      std::size_t assigned = 0;
      for (const auto& ph : trace.phases) assigned += ph.assigned.size();
      EXPECT_EQ(assigned, inst.nonhub_count());
    }
  }
}

TEST(RunPipeline, ReproduciblePerSeed) {
  GeneratorParams params;
  params.seed = 12;
  params.nonhubs = 5;
  params.hubs = 4;
  const auto inst = generate_random(params);
  const auto a = run_pipeline(inst, default_ratio_base, 1, 99);
  const auto b = run_pipeline(inst, default_ratio_base, 1, 99);
  EXPECT_EQ(a.best, b.best);
  EXPECT_EQ(a.best_cost, b.best_cost);
  EXPECT_DOUBLE_EQ(a.best_cost, evaluate_cost(inst, a.best));
}

TEST(RunPipeline, OneHubCostEqualsRelaxation) {
  GeneratorParams params;
  params.seed = 5;
  params.nonhubs = 4;
  params.hubs = 1;
  const auto inst = generate_random(params);
  const auto res = run_pipeline(inst, default_ratio_base, 10, 3);
  for (double c : res.costs) EXPECT_NEAR(c, res.relaxation.objective_value, 1e-9 * c);
}

TEST(RunPipeline, MeanWithinGuarantee) {
  GeneratorParams params;
  params.seed = 2024;
  params.nonhubs = 4;
  params.hubs = 3;
  params.ell_max = 30;
  const auto inst = generate_random(params);
  const auto res = run_pipeline(inst, default_ratio_base, 2000, 8);
  double mean = 0.0, ss = 0.0;
  for (double c : res.costs) mean += c;
  mean /= res.costs.size();
  for (double c : res.costs) ss += (c - mean) * (c - mean);
  const double se = std::sqrt(ss / (res.costs.size() - 1)) / std::sqrt(2000.0);
  EXPECT_LE(mean, 5.281 * res.relaxation.objective_value + 3.0 * se);
  EXPECT_LE(res.best_cost, mean);
}

TEST(RunPipeline, RejectsBadArguments) {
  GeneratorParams params;
  const auto inst = generate_random(params);
  EXPECT_THROW(run_pipeline(inst, 1.0, 10, 1), Error);
  EXPECT_THROW(run_pipeline(inst, 2.0, 0, 1), Error);
}
