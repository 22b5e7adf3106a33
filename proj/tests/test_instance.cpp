#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

#include "oracles.hpp"
#include "starhub/instance.hpp"
#include "starhub/instance_io.hpp"

using namespace starhub;

namespace {

Instance two_by(std::vector<std::int64_t> ell, Matrix<double> c, double w12, double w21 = 0.0) {
  Matrix<double> w(2, 2);
  w(0, 1) = w12;
  w(1, 0) = w21;
  return Instance::make(std::move(ell), std::move(c), std::move(w));
}

// Checks every documented invariant of an instance.
void expect_valid(const Instance& inst) {
  const auto& ell = inst.spoke_lengths();
  EXPECT_TRUE(std::is_sorted(ell.begin(), ell.end()));
  for (auto l : ell) EXPECT_GE(l, 0);
  ASSERT_EQ(inst.collection().rows(), inst.nonhub_count());
  ASSERT_EQ(inst.collection().cols(), inst.hub_count());
  ASSERT_EQ(inst.flows().rows(), inst.nonhub_count());
  ASSERT_EQ(inst.flows().cols(), inst.nonhub_count());
  for (std::size_t p = 0; p < inst.nonhub_count(); ++p) {
    EXPECT_EQ(inst.flows()(p, p), 0.0);
    for (std::size_t q = 0; q < inst.nonhub_count(); ++q) EXPECT_GE(inst.flows()(p, q), 0.0);
    for (std::size_t i = 0; i < inst.hub_count(); ++i) EXPECT_GE(inst.collection()(p, i), 0.0);
  }
}

}  // namespace

TEST(EvaluateCost, ZeroSpokesLeaveOnlyCollection) {
  Matrix<double> c(2, 3);
  c(0, 0) = 1.5; c(0, 1) = 2.0; c(0, 2) = 9.0;
  c(1, 0) = 0.25; c(1, 1) = 4.0; c(1, 2) = 3.0;
  const auto inst = two_by({0, 0, 0}, c, 1.0);
  EXPECT_DOUBLE_EQ(evaluate_cost(inst, Assignment{{0, 0}}), 1.5 + 0.25);
}

TEST(EvaluateCost, HubPairTermIsSpokeSum) {
  const auto inst = two_by({1, 2}, Matrix<double>(2, 2), 1.0, 0.0);
  EXPECT_DOUBLE_EQ(evaluate_cost(inst, Assignment{{0, 1}}), 3.0);
  EXPECT_DOUBLE_EQ(evaluate_cost(inst, Assignment{{1, 1}}), 0.0);
}

TEST(EvaluateCost, MatchesIndependentEvaluator) {
  GeneratorParams params;
  params.nonhubs = 4;
  params.hubs = 3;
  Rng pick(99);
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    params.seed = seed;
    const auto inst = generate_random(params);
    std::vector<std::size_t> f(4);
    for (auto& v : f) v = pick.below(3);
    EXPECT_NEAR(evaluate_cost(inst, Assignment{f}), oracle::integer_program_cost(inst, f),
                1e-9 * std::max(1.0, oracle::integer_program_cost(inst, f)));
  }
}

TEST(EvaluateCost, DimensionMismatchIsStructured) {
  const auto inst = two_by({1, 2}, Matrix<double>(2, 2), 1.0);
  try {
    evaluate_cost(inst, Assignment{{0}});
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::dimension_mismatch);
  }
  EXPECT_THROW(evaluate_cost(inst, Assignment{{0, 5}}), Error);
}

TEST(EvaluateCost, InvariantUnderHubRelabeling) {
  Rng rng(5);
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    GeneratorParams params;
    params.seed = seed;
    params.nonhubs = 5;
    params.hubs = 4;
    const auto inst = generate_random(params);
    std::vector<std::size_t> perm(4);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::shuffle(perm.begin(), perm.end(), std::mt19937(static_cast<unsigned>(seed)));

    // Hub k of the relabeled instance is hub perm[k] of the original.
    std::vector<std::int64_t> ell(4);
    Matrix<double> c(5, 4);
    for (std::size_t k = 0; k < 4; ++k) {
      ell[k] = inst.spoke_length(perm[k]);
      for (std::size_t p = 0; p < 5; ++p) c(p, k) = inst.collection()(p, perm[k]);
    }
    const auto relabeled = Instance::make(ell, c, inst.flows());

    std::vector<std::size_t> f(5);
    for (auto& v : f) v = rng.below(4);
    std::vector<std::size_t> inverse(4);
    for (std::size_t k = 0; k < 4; ++k) inverse[perm[k]] = k;
    std::vector<std::size_t> g(5);
    for (std::size_t p = 0; p < 5; ++p) g[p] = inverse[f[p]];

    EXPECT_NEAR(evaluate_cost(inst, Assignment{f}), evaluate_cost(relabeled, from_external(relabeled, g)), 1e-9);
  }
}

TEST(EvaluateCost, BoundedBelowByCheapestCollection) {
  Rng rng(17);
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    GeneratorParams params;
    params.seed = seed;
    params.nonhubs = 5;
    params.hubs = 4;
    const auto inst = generate_random(params);
    double bound = 0.0;
    for (std::size_t p = 0; p < 5; ++p)
      for (std::size_t q = 0; q < 5; ++q) {
        if (p == q) continue;
        auto cp = inst.collection().row(p);
        auto cq = inst.collection().row(q);
        bound += inst.flows()(p, q) * (*std::min_element(cp.begin(), cp.end()) + *std::min_element(cq.begin(), cq.end()));
      }
    std::vector<std::size_t> f(5);
    for (auto& v : f) v = rng.below(4);
    EXPECT_GE(evaluate_cost(inst, Assignment{f}), bound - 1e-9);
  }
}

TEST(StarMetric, IsAMetric) {
  const StarMetric m(std::vector<std::int64_t>{0, 1, 1, 4, 9});
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_EQ(m(i, i), 0.0);
    for (std::size_t j = 0; j < 5; ++j) {
      EXPECT_EQ(m(i, j), m(j, i));
      for (std::size_t k = 0; k < 5; ++k) EXPECT_LE(m(i, k), m(i, j) + m(j, k));
    }
  }
}

TEST(Generate, SingleNonhubHasZeroCost) {
  GeneratorParams params;
  params.seed = 1;
  params.nonhubs = 1;
  params.hubs = 1;
  const auto inst = generate_random(params);
  EXPECT_EQ(inst.nonhub_count(), 1u);
  EXPECT_EQ(inst.hub_count(), 1u);
  EXPECT_EQ(evaluate_cost(inst, Assignment{{0}}), 0.0);
}

TEST(Generate, DeterministicPerSeed) {
  GeneratorParams params;
  params.seed = 42;
  params.nonhubs = 6;
  params.hubs = 4;
  EXPECT_EQ(generate_random(params), generate_random(params));
  params.seed = 43;
  auto other = generate_random(params);
  params.seed = 42;
  EXPECT_FALSE(generate_random(params) == other);
}

TEST(Generate, SeedSevenSatisfiesInvariants) {
  GeneratorParams params;
  params.seed = 7;
  params.nonhubs = 5;
  params.hubs = 4;
  expect_valid(generate_random(params));
}

TEST(Generate, DensityControlsPositivePairs) {
  GeneratorParams params;
  params.nonhubs = 6;
  params.density = 0.5;
  const auto inst = generate_random(params);
  std::size_t positive = 0;
  for (double v : inst.flows().data()) positive += v > 0.0;
  EXPECT_EQ(positive, 15u);
}

TEST(Generate, ClampsBadParameters) {
  GeneratorParams params;
  params.nonhubs = 0;
  params.hubs = 0;
  params.density = 3.0;
  const auto inst = generate_random(params);
  EXPECT_EQ(inst.nonhub_count(), 1u);
  EXPECT_EQ(inst.hub_count(), 1u);
}

TEST(InstanceIo, RoundTripOnGeneratedCorpus) {
  for (std::uint64_t seed = 1; seed <= 25; ++seed) {
    GeneratorParams params;
    params.seed = seed;
    params.nonhubs = 1 + seed % 6;
    params.hubs = 1 + seed % 5;
    params.density = 0.6;
    const auto inst = generate_random(params);
    const auto text = write_instance(inst);
    const auto back = read_instance(text);
    EXPECT_EQ(back, inst);
    EXPECT_EQ(write_instance(back), text);
  }
}

TEST(InstanceIo, WriterEmitsSchemaOrderAnd17Digits) {
  Matrix<double> c(1, 2);
  c(0, 0) = 0.1;
  c(0, 1) = 2.0;
  const auto inst = Instance::make({3, 5}, c, Matrix<double>(1, 1));
  EXPECT_EQ(write_instance(inst),
            "{\"h\":2,\"n\":1,\"ell\":[3,5],\"c\":[[0.10000000000000001,2]],\"w\":[[0]]}\n");
}

TEST(InstanceIo, UnsortedSpokesAreCanonicalizedConsistently) {
  const std::string text =
      R"({"h":3,"n":3,"ell":[7,0,3],
          "c":[[1,2,3],[4,5,6],[7,8,9.5]],
          "w":[[0,1,2],[3,0,0.5],[1,1,0]]})";
  const auto inst = read_instance(text);
  EXPECT_EQ(inst.spoke_lengths(), (std::vector<std::int64_t>{0, 3, 7}));
  EXPECT_EQ(inst.hub_ids(), (std::vector<std::size_t>{1, 2, 0}));
  EXPECT_EQ(inst.collection()(2, 0), 8.0);
  EXPECT_EQ(inst.collection()(2, 2), 7.0);

  // Objective is unchanged when the same allocation is expressed in the
  // file's hub order; compare against the unsorted data evaluated directly.
  const std::vector<std::int64_t> raw_ell{7, 0, 3};
  const double raw_c[3][3] = {{1, 2, 3}, {4, 5, 6}, {7, 8, 9.5}};
  const double raw_w[3][3] = {{0, 1, 2}, {3, 0, 0.5}, {1, 1, 0}};
  for (std::size_t code = 0; code < 27; ++code) {
    const std::vector<std::size_t> f{code % 3, (code / 3) % 3, code / 9};
    double direct = 0.0;
    for (std::size_t p = 0; p < 3; ++p)
      for (std::size_t q = 0; q < 3; ++q) {
        if (p == q) continue;
        const double hub_pair = f[p] == f[q] ? 0.0 : static_cast<double>(raw_ell[f[p]] + raw_ell[f[q]]);
        direct += raw_w[p][q] * (raw_c[p][f[p]] + raw_c[q][f[q]] + hub_pair);
      }
    EXPECT_DOUBLE_EQ(evaluate_cost(inst, from_external(inst, f)), direct);
    EXPECT_EQ(to_external(inst, from_external(inst, f)), f);
  }
  // Writing restores the file's order.
  EXPECT_NE(write_instance(inst).find("\"ell\":[7,0,3]"), std::string::npos);
}

TEST(InstanceIo, RejectsSelfFlow) {
  const std::string text = R"({"h":1,"n":2,"ell":[1],"c":[[1],[1]],"w":[[0.5,1],[1,0]]})";
  try {
    read_instance(text);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::invariant_violation);
    EXPECT_NE(std::string(e.what()).find("self flow"), std::string::npos);
  }
}

TEST(InstanceIo, ParseErrorsCarryContext) {
  try {
    read_instance("{\"h\":1,\n\"n\":1,\n\"ell\":[1,]}");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::parse_error);
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
  try {
    read_instance(R"({"h":2,"n":1,"ell":[1,2],"c":[[1]],"w":[[0]]})");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::parse_error);
    EXPECT_NE(std::string(e.what()).find("'c' row 0"), std::string::npos) << e.what();
  }
  EXPECT_THROW(read_instance(R"({"h":1,"n":1,"ell":[1.5],"c":[[1]],"w":[[0]]})"), Error);
  EXPECT_THROW(read_instance(R"({"h":1,"n":1,"ell":[-1],"c":[[1]],"w":[[0]]})"), Error);
  EXPECT_THROW(read_instance(R"({"n":1,"ell":[1],"c":[[1]],"w":[[0]]})"), Error);
}
