#include <gtest/gtest.h>

#include <cmath>

#include "gapmech/mechanism.hpp"
#include "gapmech/rng.hpp"
#include "gapmech/rounding.hpp"
#include "gapmech/verify.hpp"
#include "oracles.hpp"

using namespace gapmech;

namespace {

const double kInvE = std::exp(-1.0);

SparseFractionalAssignment example_x() {
  // phi gives the example marginals: y11=.6, y12=.3, y21=.4, y22=.7.
  SparseFractionalAssignment x(2, 2);
  x.add(0, {0, 1}, 0.3);
  x.add(0, {0}, 0.3);
  x.add(1, {0, 1}, 0.4);
  x.add(1, {1}, 0.3);
  return x;
}

ItemPermutation identity_perm(std::size_t bins, std::size_t items) {
  ItemPermutation p;
  for (std::size_t j = 0; j < items; ++j) {
    std::vector<std::size_t> row(bins);
    for (std::size_t i = 0; i < bins; ++i) row[i] = i;
    p.order.push_back(row);
  }
  return p;
}

}  // namespace

TEST(Dominate, PeelsFromTheOnlyComponent) {
  SparseFractionalAssignment x(1, 2);
  x.add(0, {0, 1}, 0.8);
  MarginalMatrix target(1, 2);
  target(0, 0) = 0.5;
  target(0, 1) = 0.8;
  const SparseFractionalAssignment out = dominate_to_target(x, target);
  ASSERT_EQ(out.components(0).size(), 2u);
  EXPECT_EQ(out.components(0)[0].items, (ItemSet{0, 1}));
  EXPECT_NEAR(out.components(0)[0].mass, 0.5, 1e-15);
  EXPECT_EQ(out.components(0)[1].items, ItemSet{1});
  EXPECT_NEAR(out.components(0)[1].mass, 0.3, 1e-15);
}

TEST(Dominate, SameTargetIsNoOp) {
  const SparseFractionalAssignment x = example_x();
  const SparseFractionalAssignment out = dominate_to_target(x, phi(x));
  for (std::size_t i = 0; i < 2; ++i) {
    ASSERT_EQ(out.components(i).size(), x.components(i).size());
    for (std::size_t k = 0; k < x.components(i).size(); ++k) {
      EXPECT_EQ(out.components(i)[k].items, x.components(i)[k].items);
      EXPECT_EQ(out.components(i)[k].mass, x.components(i)[k].mass);
    }
  }
}

TEST(Dominate, FullPeelDropsTheBin) {
  SparseFractionalAssignment x(1, 1);
  x.add(0, {0}, 0.6);
  EXPECT_TRUE(dominate_to_target(x, MarginalMatrix(1, 1)).components(0).empty());
}

TEST(Dominate, RejectsTargetAbovePhi) {
  SparseFractionalAssignment x(1, 1);
  x.add(0, {0}, 0.6);
  EXPECT_THROW(dominate_to_target(x, MarginalMatrix(1, 1, 0.7)), ValidationError);
  EXPECT_THROW(dominate_to_target(x, MarginalMatrix(2, 1)), ValidationError);
}

TEST(Dominate, RandomPairsAreExactWithBoundedGrowth) {
  SplitMix rng(31);
  for (int t = 0; t < 1000; ++t) {
    const std::size_t n = 1 + rng.below(3), m = 1 + rng.below(4);
    const Instance inst = generate_instance(n, m, rng.next(), Profile::kUniform);
    const SparseFractionalAssignment x = random_fractional_assignment(inst, rng.next(), 4);
    MarginalMatrix target = phi(x);
    for (double& v : target.flat()) v *= rng.uniform();
    const SparseFractionalAssignment out = dominate_to_target(x, target);
    const MarginalMatrix got = phi(out);
    for (std::size_t k = 0; k < got.size(); ++k) ASSERT_NEAR(got.flat()[k], target.flat()[k], 1e-9);
    EXPECT_LE(out.component_count(), x.component_count() + n * m);
    for (std::size_t i = 0; i < n; ++i) EXPECT_LE(out.bin_mass(i), x.bin_mass(i) + 1e-12);
  }
}

TEST(Damp, ClosedForms) {
  MarginalMatrix y(1, 3);
  y(0, 1) = 1.0;
  y(0, 2) = 0.6;
  const MarginalMatrix d = damp_marginals(y);
  EXPECT_EQ(d(0, 0), 0.0);
  EXPECT_NEAR(d(0, 1), 0.632121, 1e-6);
  EXPECT_NEAR(d(0, 2), 0.451188, 1e-6);
}

TEST(Retention, Limits) {
  EXPECT_EQ(retention_probability(0.0), 1.0);
  EXPECT_NEAR(retention_probability(1e-12), 1.0, 1e-12);
  EXPECT_NEAR(retention_probability(1.0), 1 - kInvE, 1e-15);
}

TEST(RoundParameterized, SingleBinBernoulli) {
  SparseFractionalAssignment x(1, 1);
  x.add(0, {0}, 1.0);
  const ItemPermutation perm = identity_perm(1, 1);
  int hits = 0;
  for (std::uint64_t s = 0; s < 100000; ++s) hits += !round_parameterized(x, perm, s).allocation.sets[0].empty();
  EXPECT_NEAR(hits / 1e5, 1 - kInvE, 0.01);
}

TEST(RoundParameterized, TwoBinsProductLaw) {
  SparseFractionalAssignment x(2, 1);
  x.add(0, {0}, 1.0);
  x.add(1, {0}, 1.0);
  const ItemPermutation perm = identity_perm(2, 1);
  const AssignmentDistribution d = assignment_distribution(damp_assignment(x), perm);
  EXPECT_NEAR(d.q(0, 0), 1 - kInvE, 1e-15);
  EXPECT_NEAR(d.q(1, 0), kInvE * (1 - kInvE), 1e-15);
  const Matrix c = assignment_counts(GreedyRounder(damp_assignment(x), perm), 200000, 5);
  EXPECT_NEAR(c(0, 0) / 2e5, d.q(0, 0), 0.005);
  EXPECT_NEAR(c(1, 0) / 2e5, d.q(1, 0), 0.005);
}

TEST(RoundParameterized, EmptyAssignmentGivesEmptyAllocation) {
  const SparseFractionalAssignment x(2, 3);
  for (std::uint64_t s = 0; s < 50; ++s) {
    const RoundingOutcome r = round_parameterized(x, identity_perm(2, 3), s);
    for (const auto& set : r.allocation.sets) EXPECT_TRUE(set.empty());
  }
}

TEST(RoundGreedy, ExampleMeanNearF) {
  const Instance inst = oracle::example_instance();
  const ItemPermutation perm = value_sorted_permutation(inst);
  const SparseFractionalAssignment x = example_x();
  const auto est = monte_carlo_welfare(GreedyRounder(damp_assignment(x), perm), inst.values, 1000000, 1);
  EXPECT_NEAR(est.mean, 10.0109, 0.01 * 10.0109);
}

TEST(RoundGreedy, EqualTopValuesGoToLowerBin) {
  Instance inst = oracle::example_instance();
  inst.values(0, 0) = inst.values(1, 0) = 6;
  SparseFractionalAssignment x(2, 2);
  x.add(0, {0}, 1.0);
  x.add(1, {0}, 1.0);
  const AssignmentDistribution d = assignment_distribution(damp_assignment(x), value_sorted_permutation(inst));
  EXPECT_GT(d.q(0, 0), d.q(1, 0));
  for (std::uint64_t s = 0; s < 200; ++s) {
    const RoundingOutcome r = round_greedy(x, inst, s);
    if (r.raw_draws[0] == ItemSet{0}) EXPECT_EQ(r.allocation.sets[0], ItemSet{0});
  }
}

TEST(RoundGreedy, OutcomesAreFeasibleSubsetsOfDrawsAndSeedDeterministic) {
  SplitMix rng(41);
  for (int t = 0; t < 30; ++t) {
    const Instance inst = generate_instance(3, 4, rng.next(), Profile::kUniform);
    const SparseFractionalAssignment x = random_fractional_assignment(inst, rng.next());
    for (std::uint64_t s = 0; s < 100; ++s) {
      for (const RoundingOutcome& r : {round_greedy(x, inst, s), round_simplified(x, inst, s)}) {
        ASSERT_TRUE(is_feasible_allocation(inst, r.allocation));
        for (std::size_t i = 0; i < 3; ++i) {
          for (std::size_t j : r.allocation.sets[i]) {
            EXPECT_NE(std::find(r.raw_draws[i].begin(), r.raw_draws[i].end(), j), r.raw_draws[i].end());
          }
        }
      }
      EXPECT_EQ(round_greedy(x, inst, s).allocation, round_greedy(x, inst, s).allocation);
      EXPECT_EQ(round_simplified(x, inst, s).allocation, round_simplified(x, inst, s).allocation);
    }
  }
}

TEST(AssignmentDistribution, ClosedForms) {
  SparseFractionalAssignment one(1, 1);
  one.add(0, {0}, 0.5);
  AssignmentDistribution d = assignment_distribution(one, identity_perm(1, 1));
  EXPECT_DOUBLE_EQ(d.q(0, 0), 0.5);
  EXPECT_DOUBLE_EQ(d.unassigned(0), 0.5);

  SparseFractionalAssignment two(2, 1);
  two.add(0, {0}, 0.5);
  two.add(1, {0}, 0.5);
  d = assignment_distribution(two, identity_perm(2, 1));
  EXPECT_DOUBLE_EQ(d.q(0, 0), 0.5);
  EXPECT_DOUBLE_EQ(d.q(1, 0), 0.25);
  EXPECT_DOUBLE_EQ(d.unassigned(0), 0.25);
}

TEST(AssignmentDistribution, ExampleExpectationEqualsF) {
  const Instance inst = oracle::example_instance();
  const ItemPermutation perm = value_sorted_permutation(inst);
  const AssignmentDistribution d = assignment_distribution(damp_assignment(example_x()), perm);
  EXPECT_NEAR(expected_welfare(inst.values, d), 10.0109, 1e-4);
  EXPECT_NEAR(expected_welfare(inst.values, d), eval_F(inst, perm, oracle::example_marginals()), 1e-9);
}

TEST(AssignmentDistribution, MatchesJointDrawEnumeration) {
  SplitMix rng(43);
  for (int t = 0; t < 60; ++t) {
    const std::size_t n = 1 + rng.below(3), m = 1 + rng.below(4);
    const Instance inst = generate_instance(n, m, rng.next(), Profile::kUniform);
    const ItemPermutation perm = value_sorted_permutation(inst);
    const SparseFractionalAssignment damped = damp_assignment(random_fractional_assignment(inst, rng.next()));
    const Matrix q = assignment_distribution(damped, perm).q;
    const Matrix ref = oracle::enumerate_assignment(damped, perm.order);
    for (std::size_t k = 0; k < q.size(); ++k) EXPECT_NEAR(q.flat()[k], ref.flat()[k], 1e-12);
  }
}

TEST(RoundingLaw, ExpectedWelfareEqualsFOfUndampedMarginals) {
  SplitMix rng(44);
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 1 + rng.below(4), m = 1 + rng.below(4);
    const Instance inst = generate_instance(n, m, rng.next(), Profile::kCorrelated);
    const ItemPermutation perm = value_sorted_permutation(inst);
    const SparseFractionalAssignment x = random_fractional_assignment(inst, rng.next());
    const double exact = expected_welfare(inst.values, assignment_distribution(damp_assignment(x), perm));
    EXPECT_NEAR(exact, oracle::F_by_expectation(inst.values, phi(x)), 1e-9);
  }
}

TEST(RoundingLaw, MonteCarloWithinThreeStandardErrors) {
  const Instance inst = generate_instance(3, 4, 321, Profile::kUniform);
  const ItemPermutation perm = value_sorted_permutation(inst);
  const SparseFractionalAssignment x = random_fractional_assignment(inst, 654);
  const auto est = monte_carlo_welfare(GreedyRounder(damp_assignment(x), perm), inst.values, 100000, 9);
  EXPECT_EQ(est.samples, 100000u);
  EXPECT_LE(std::abs(est.mean - eval_F(inst, perm, phi(x))), 3 * est.stderr_);
}

TEST(PermutationDominance, ValueOrderIsBest) {
  SplitMix rng(45);
  for (int t = 0; t < 200; ++t) {
    const Instance inst = generate_instance(3, 3, rng.next(), Profile::kUniform);
    const ItemPermutation sigma = value_sorted_permutation(inst);
    ItemPermutation pi = sigma;
    for (auto& row : pi.order) std::reverse(row.begin(), row.end());
    const SparseFractionalAssignment damped = damp_assignment(random_fractional_assignment(inst, rng.next()));
    EXPECT_GE(expected_welfare(inst.values, assignment_distribution(damped, sigma)),
              expected_welfare(inst.values, assignment_distribution(damped, pi)) - 1e-12);
  }
}

TEST(Simplified, FrequenciesMatchGreedy) {
  const Instance inst = generate_instance(2, 3, 8, Profile::kUniform);
  const ItemPermutation perm = value_sorted_permutation(inst);
  const SparseFractionalAssignment x = random_fractional_assignment(inst, 3);
  const std::uint64_t N = 300000;
  const Matrix a = assignment_counts(GreedyRounder(damp_assignment(x), perm), N, 1);
  const Matrix b = assignment_counts(SimplifiedRounder(x, perm), N, 2);
  const Matrix q = assignment_distribution(damp_assignment(x), perm).q;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double pa = a.flat()[k] / N, pb = b.flat()[k] / N;
    const double se = std::sqrt((pa * (1 - pa) + pb * (1 - pb)) / N);
    EXPECT_LE(std::abs(pa - pb), 4 * se + 1e-12);
    EXPECT_NEAR(pb, q.flat()[k], 0.01);
  }
}
