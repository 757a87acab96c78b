#include <gtest/gtest.h>

#include <cmath>

#include "gapmech/mechanism.hpp"
#include "gapmech/objective.hpp"
#include "gapmech/rng.hpp"
#include "gapmech/verify.hpp"
#include "oracles.hpp"

using namespace gapmech;

TEST(Phi, SingleSetSpreadsMass) {
  SparseFractionalAssignment x(1, 2);
  x.add(0, {0, 1}, 0.5);
  const MarginalMatrix y = phi(x);
  EXPECT_DOUBLE_EQ(y(0, 0), 0.5);
  EXPECT_DOUBLE_EQ(y(0, 1), 0.5);
}

TEST(Phi, EmptyAssignmentIsZero) {
  const MarginalMatrix y = phi(SparseFractionalAssignment(2, 3));
  for (double v : y.flat()) EXPECT_EQ(v, 0.0);
}

TEST(Phi, OverlappingSetsAdd) {
  SparseFractionalAssignment x(1, 2);
  x.add(0, {0}, 0.3);
  x.add(0, {0, 1}, 0.2);
  const MarginalMatrix y = phi(x);
  EXPECT_DOUBLE_EQ(y(0, 0), 0.5);
  EXPECT_DOUBLE_EQ(y(0, 1), 0.2);
}

TEST(SparseAssignment, MergesRepeatedSetsAndDropsEmptyOnes) {
  SparseFractionalAssignment x(1, 3);
  x.add(0, {2, 0}, 0.25);
  x.add(0, {0, 2}, 0.25);
  x.add(0, {}, 0.4);
  ASSERT_EQ(x.components(0).size(), 1u);
  EXPECT_EQ(x.components(0)[0].items, (ItemSet{0, 2}));
  EXPECT_DOUBLE_EQ(x.components(0)[0].mass, 0.5);
  EXPECT_DOUBLE_EQ(x.bin_mass(0), 0.5);
}

TEST(CheckMarginals, RejectsOutOfRangeAndWrongShape) {
  MarginalMatrix y(2, 2, 0.5);
  EXPECT_NO_THROW(check_marginals(y, 2, 2));
  EXPECT_THROW(check_marginals(y, 2, 3), ValidationError);
  y(1, 0) = 1.1;
  EXPECT_THROW(check_marginals(y, 2, 2), ValidationError);
  y(1, 0) = -0.1;
  EXPECT_THROW(check_marginals(y, 2, 2), ValidationError);
}

TEST(EvalF, ExampleValue) {
  const Instance inst = oracle::example_instance();
  const double f = eval_F(inst, value_sorted_permutation(inst), oracle::example_marginals());
  const double expr = 4 * (1 - std::exp(-0.6)) + 4 * (1 - std::exp(-1.0)) + 5 * (1 - std::exp(-0.7)) +
                      5 * (1 - std::exp(-1.0));
  EXPECT_NEAR(f, expr, 1e-12);
  EXPECT_NEAR(f, 10.010911, 1e-6);
}

TEST(EvalF, ZeroMarginalsGiveZero) {
  const Instance inst = generate_instance(3, 4, 9, Profile::kUniform);
  EXPECT_EQ(eval_F(inst, value_sorted_permutation(inst), MarginalMatrix(3, 4)), 0.0);
}

TEST(EvalF, SingleEntry) {
  Instance inst;
  inst.values = Matrix(1, 1, 1.0);
  inst.weights = Matrix(1, 1, 1.0);
  inst.capacities = {1};
  EXPECT_NEAR(eval_F(inst, value_sorted_permutation(inst), MarginalMatrix(1, 1, 1.0)), 0.6321205588,
              1e-9);
}

TEST(EvalF, MatchesExpectationForm) {
  SplitMix rng(3);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 1 + rng.below(5), m = 1 + rng.below(5);
    const Instance inst = generate_instance(n, m, rng.next(), Profile::kUniform);
    const MarginalMatrix y = random_marginals(n, m, rng.next());
    EXPECT_NEAR(eval_F(inst, value_sorted_permutation(inst), y), oracle::F_by_expectation(inst.values, y),
                1e-10);
  }
}

TEST(GradF, AtZeroEqualsValues) {
  const Instance inst = generate_instance(3, 4, 21, Profile::kCorrelated);
  const Matrix g = grad_F(inst, value_sorted_permutation(inst), MarginalMatrix(3, 4));
  for (std::size_t k = 0; k < g.size(); ++k) EXPECT_NEAR(g.flat()[k], inst.values.flat()[k], 1e-12);
}

TEST(GradF, ExampleEntry) {
  const Instance inst = oracle::example_instance();
  const Matrix g = grad_F(inst, value_sorted_permutation(inst), oracle::example_marginals());
  EXPECT_NEAR(g(0, 0), 4 * std::exp(-0.6) + 4 * std::exp(-1.0), 1e-12);
  EXPECT_NEAR(g(0, 0), 3.66676, 1e-5);
}

TEST(GradF, MatchesCentralDifferences) {
  SplitMix rng(8);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const Instance inst = generate_instance(3, 4, rng.next(), Profile::kUniform);
    const ItemPermutation perm = value_sorted_permutation(inst);
    const MarginalMatrix y = random_marginals(3, 4, rng.next());
    const Matrix g = grad_F(inst, perm, y);
    const Matrix fd = oracle::central_difference(
        [&](const Matrix& p) { return oracle::F_by_expectation(inst.values, perm.order, p); }, y, 1e-6);
    for (std::size_t k = 0; k < g.size(); ++k) {
      worst = std::max(worst, std::abs(g.flat()[k] - fd.flat()[k]) / std::abs(fd.flat()[k]));
    }
  }
  EXPECT_LE(worst, 1e-4);
}

TEST(GradF, NonNegativeAndBoundedByLargestValue) {
  SplitMix rng(12);
  for (int t = 0; t < 300; ++t) {
    const Instance inst = generate_instance(1 + rng.below(4), 1 + rng.below(4), rng.next(),
                                            Profile::kKnapsackHard);
    const Matrix g = grad_F(inst, value_sorted_permutation(inst),
                            random_marginals(inst.bins(), inst.items(), rng.next()));
    for (double v : g.flat()) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, inst.max_value() + 1e-12);
    }
  }
}

TEST(Properties, Concavity) {
  SplitMix rng(13);
  for (int t = 0; t < 1000; ++t) {
    const Instance inst = generate_instance(3, 4, 100 + t % 7, Profile::kUniform);
    const ItemPermutation perm = value_sorted_permutation(inst);
    const MarginalMatrix a = random_marginals(3, 4, rng.next()), b = random_marginals(3, 4, rng.next());
    const double lam = rng.uniform();
    MarginalMatrix mix(3, 4);
    for (std::size_t k = 0; k < mix.size(); ++k) mix.flat()[k] = lam * a.flat()[k] + (1 - lam) * b.flat()[k];
    EXPECT_GE(eval_F(inst, perm, mix), lam * eval_F(inst, perm, a) + (1 - lam) * eval_F(inst, perm, b) - 1e-9);
  }
}

TEST(Properties, Monotone) {
  SplitMix rng(14);
  for (int t = 0; t < 500; ++t) {
    const Instance inst = generate_instance(3, 3, rng.next(), Profile::kUniform);
    const ItemPermutation perm = value_sorted_permutation(inst);
    const MarginalMatrix y = random_marginals(3, 3, rng.next());
    MarginalMatrix up = y;
    up(rng.below(3), rng.below(3)) = 1.0;
    EXPECT_LE(eval_F(inst, perm, y), eval_F(inst, perm, up));
  }
}

TEST(Properties, GradientShiftBounds) {
  SplitMix rng(15);
  for (int t = 0; t < 1000; ++t) {
    const Instance inst = generate_instance(3, 4, 200 + t % 7, Profile::kUniform);
    const ItemPermutation perm = value_sorted_permutation(inst);
    const MarginalMatrix y = random_marginals(3, 4, rng.next());
    const double delta = rng.uniform(0.0, 0.2);
    MarginalMatrix y2 = y;
    for (double& v : y2.flat()) v = std::clamp(v + rng.uniform(-delta, delta), 0.0, 1.0);
    const Matrix g = grad_F(inst, perm, y), g2 = grad_F(inst, perm, y2);
    for (std::size_t k = 0; k < g.size(); ++k) {
      EXPECT_GE(g2.flat()[k], std::exp(-3 * delta) * g.flat()[k] - 1e-9);
      EXPECT_LE(g2.flat()[k], std::exp(3 * delta) * g.flat()[k] + 1e-9);
    }
  }
}

TEST(Properties, SuppliedOrderIsUsedVerbatim) {
  // Zeroing bin 0 while keeping its first place reproduces the negative leading term.
  const Instance inst = oracle::example_instance();
  const ItemPermutation perm = value_sorted_permutation(inst);
  Matrix v = inst.values;
  v(0, 0) = v(0, 1) = 0;
  const double expect = -4 * (1 - std::exp(-0.6)) + 4 * (1 - std::exp(-1.0)) + 10 * (1 - std::exp(-0.7));
  EXPECT_NEAR(eval_F(v, perm, oracle::example_marginals()), expect, 1e-12);
  EXPECT_NEAR(expect, 5.7579, 1e-4);
}
