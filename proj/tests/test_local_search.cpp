#include <gtest/gtest.h>

#include <cmath>

#include "gapmech/local_search.hpp"
#include "gapmech/mechanism.hpp"
#include "gapmech/rng.hpp"
#include "oracles.hpp"

using namespace gapmech;

namespace {

Instance scalar_instance() {
  Instance inst;
  inst.values = Matrix(1, 1, 1.0);
  inst.weights = Matrix(1, 1, 1.0);
  inst.capacities = {1};
  return inst;
}

const double kOneMinusInvE = 1 - std::exp(-1.0);

}  // namespace

TEST(SearchConfig, DerivedParameters) {
  const SearchConfig cfg = SearchConfig::make(0.05, 2, 3);
  EXPECT_DOUBLE_EQ(cfg.delta, 0.05 / 72);
  EXPECT_EQ(cfg.z_cap, 1440u);
  EXPECT_EQ(cfg.max_iters, static_cast<std::uint64_t>(std::ceil(12.0 * 9 * 4 / 0.0025)));
  EXPECT_NO_THROW(cfg.check(2, 3));
}

TEST(SearchConfig, RejectsInconsistentValues) {
  SearchConfig cfg = SearchConfig::make(0.1, 2, 2);
  cfg.delta *= 2;
  EXPECT_THROW(cfg.check(2, 2), ValidationError);
  EXPECT_THROW(SearchConfig::make(0.0, 2, 2).check(2, 2), ValidationError);
  EXPECT_THROW(SearchConfig::make(1.5, 2, 2).check(2, 2), ValidationError);
  EXPECT_THROW(maximize_F(scalar_instance(), SearchConfig::make(0.1, 2, 2)), ValidationError);
}

TEST(MaximizeF, AllZeroValuesReturnEmpty) {
  Instance inst = generate_instance(2, 3, 1, Profile::kUniform);
  inst.values = Matrix(2, 3);
  const SearchResult r = maximize_F(inst, SearchConfig::make(0.1, 2, 3));
  EXPECT_EQ(r.x.component_count(), 0u);
  EXPECT_EQ(r.objective, 0.0);
  EXPECT_TRUE(r.trace.iterations.empty());
}

TEST(MaximizeF, ScalarDynamicsMatchSimulation) {
  for (double eps : {0.5, 0.05}) {
    const SearchConfig cfg = SearchConfig::make(eps, 1, 1);
    const SearchResult r = maximize_F(scalar_instance(), cfg);
    // Scalar replay: y climbs by delta while (1 - y) e^{-y} exceeds eps.
    std::uint64_t k = 0;
    while ((1 - cfg.delta * static_cast<double>(k)) * std::exp(-cfg.delta * static_cast<double>(k)) > eps) ++k;
    EXPECT_EQ(r.trace.steps, k) << "eps " << eps;
    EXPECT_NEAR(r.y(0, 0), cfg.delta * static_cast<double>(k), 1e-12);
    if (eps == 0.05) EXPECT_GE(r.objective, kOneMinusInvE - 0.05);
  }
}

TEST(MaximizeF, ExampleInstanceMeetsRatio) {
  const Instance inst = oracle::example_instance(1.0);
  const SearchResult r = maximize_F(inst, SearchConfig::make(0.25, 2, 2));
  EXPECT_DOUBLE_EQ(brute_force_opt(inst).value, 18.0);
  EXPECT_GE(r.objective, (kOneMinusInvE - 0.25) * 18.0);
  EXPECT_TRUE(certify_membership(inst, r.x).ok());
}

TEST(MaximizeF, GuaranteeVoidFlag) {
  const Instance inst = generate_instance(3, 2, 4, Profile::kUniform);
  EXPECT_TRUE(maximize_F(inst, SearchConfig::make(0.5, 3, 2)).trace.guarantee_void);
  EXPECT_FALSE(maximize_F(inst, SearchConfig::make(0.3, 3, 2)).trace.guarantee_void);
}

TEST(MaximizeF, HardStopAtIterationBudget) {
  const Instance inst = generate_instance(2, 3, 4, Profile::kUniform);
  SearchConfig cfg = SearchConfig::make(0.05, 2, 3);
  cfg.max_iters = 5;
  const SearchResult r = maximize_F(inst, cfg);
  EXPECT_TRUE(r.trace.hit_max_iters);
  EXPECT_EQ(r.trace.steps, 5u);
}

TEST(MaximizeF, MechanicsOnRandomInstances) {
  SplitMix rng(21);
  for (int t = 0; t < 12; ++t) {
    const std::size_t n = 1 + rng.below(3), m = 1 + rng.below(4);
    const Instance inst = generate_instance(n, m, rng.next(), Profile::kUniform);
    const SearchConfig cfg = SearchConfig::make(0.1, n, m);
    std::size_t max_pool = 0;
    bool reached_cap = false, dropped_after_cap = false;
    const SearchResult r = maximize_F(inst, cfg, [&](const SearchSnapshot& s) {
      max_pool = std::max(max_pool, s.pool.size());
      if (reached_cap && s.pool.size() != cfg.z_cap) dropped_after_cap = true;
      reached_cap = reached_cap || s.pool.size() == cfg.z_cap;
      const Matrix again = s.pool.scaled_sum(s.delta);
      for (std::size_t k = 0; k < again.size(); ++k) ASSERT_NEAR(again.flat()[k], s.y.flat()[k], 1e-9);
      for (std::size_t i = 0; i < n; ++i) {
        ItemSet set;
        for (std::size_t j = 0; j < m; ++j) {
          if (s.chosen[i * m + j]) set.push_back(j);
        }
        ASSERT_TRUE(is_feasible_set(inst, i, set));
      }
    });
    EXPECT_LE(max_pool, cfg.z_cap);
    EXPECT_FALSE(dropped_after_cap);

    const MembershipReport cert = certify_membership(inst, r.x);
    EXPECT_TRUE(cert.ok());
    const MarginalMatrix y = phi(r.x);
    for (std::size_t k = 0; k < y.size(); ++k) EXPECT_NEAR(y.flat()[k], r.y.flat()[k], 1e-12);

    const double gain = cfg.eps * cfg.eps * r.trace.scale / (12.0 * m * n * n);
    const auto& it = r.trace.iterations;
    for (std::size_t k = 0; k + 1 < it.size(); ++k) {
      EXPECT_GE(it[k + 1].objective - it[k].objective, gain - 1e-9);
      EXPECT_GT(it[k].gap, cfg.eps * r.trace.scale);
    }
    EXPECT_FALSE(r.trace.hit_max_iters);
    EXPECT_LE(static_cast<double>(r.trace.steps), 12.0 * m * m * n * n / (cfg.eps * cfg.eps));
    EXPECT_GE(r.objective, (kOneMinusInvE - 2 * cfg.eps) * brute_force_opt(inst).value - 1e-9);
  }
}

TEST(MaximizeF, Deterministic) {
  const Instance inst = generate_instance(3, 4, 77, Profile::kCorrelated);
  const SearchConfig cfg = SearchConfig::make(0.1, 3, 4);
  const SearchResult a = maximize_F(inst, cfg), b = maximize_F(inst, cfg);
  EXPECT_EQ(a.y, b.y);
  EXPECT_EQ(a.trace.steps, b.trace.steps);
}

TEST(MaximizeF, ScaleIgnoresPairsThatNeverFit) {
  Instance inst = oracle::example_instance(1.0);
  inst.weights(1, 1) = 2.0;  // bin 1 cannot hold item 1, whose value there is 10
  const SearchResult r = maximize_F(inst, SearchConfig::make(0.1, 2, 2));
  EXPECT_DOUBLE_EQ(r.trace.scale, 8.0);
  EXPECT_EQ(r.y(1, 1), 0.0);
}

TEST(IndicatorPool, EvictsMinimumScoreOldestFirst) {
  IndicatorPool pool(1, 2);
  pool.add({1, 0}, 0);
  pool.add({0, 1}, 1);
  pool.add({1, 0}, 2);
  Matrix u(1, 2);
  u(0, 0) = 1.0;
  u(0, 1) = 1.0;
  // Equal scores: the oldest copy (stamp 0, pattern {1,0}) leaves.
  EXPECT_EQ(pool.evict_min(u), (IndicatorPool::Bits{1, 0}));
  EXPECT_EQ(pool.size(), 2u);
  u(0, 1) = 0.5;
  EXPECT_EQ(pool.evict_min(u), (IndicatorPool::Bits{0, 1}));
  EXPECT_EQ(pool.patterns().size(), 1u);
  const Matrix y = pool.scaled_sum(0.25);
  EXPECT_DOUBLE_EQ(y(0, 0), 0.25);
  EXPECT_DOUBLE_EQ(y(0, 1), 0.0);
}

TEST(CertifyMembership, FlagsOverfullAndInfeasible) {
  const Instance inst = oracle::example_instance(1.0);
  SparseFractionalAssignment x(2, 2);
  x.add(0, {0}, 0.9);
  x.add(0, {1}, 0.6);
  x.add(1, {0, 1}, 0.2);
  const MembershipReport r = certify_membership(inst, x);
  EXPECT_FALSE(r.ok());
  EXPECT_EQ(r.overfull_bins, std::vector<std::size_t>{0});
  ASSERT_EQ(r.infeasible_sets.size(), 1u);
  EXPECT_EQ(r.infeasible_sets[0].first, 1u);
  EXPECT_NEAR(r.bin_mass[0], 1.5, 1e-12);
  EXPECT_EQ(r.positive_components, 3u);
}

TEST(CertifyMembership, EmptyAssignment) {
  const MembershipReport r = certify_membership(oracle::example_instance(), SparseFractionalAssignment(2, 2));
  EXPECT_TRUE(r.ok());
  EXPECT_EQ(r.bin_mass, (std::vector<double>{0.0, 0.0}));
  EXPECT_EQ(r.positive_components, 0u);
}
