#include "gapmech/rounding.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "gapmech/rng.hpp"

namespace gapmech {

namespace {

constexpr double kTargetSlack = 1e-12;

void add_mass(std::vector<Component>& comps, ItemSet set, double mass) {
  if (set.empty() || mass == 0.0) return;
  for (auto& c : comps) {
    if (c.items == set) {
      c.mass += mass;
      return;
    }
  }
  comps.push_back(Component{std::move(set), mass});
}

ItemSet without(const ItemSet& s, std::size_t item) {
  ItemSet out;
  out.reserve(s.size());
  for (std::size_t j : s) {
    if (j != item) out.push_back(j);
  }
  return out;
}

bool contains(const ItemSet& s, std::size_t item) {
  return std::binary_search(s.begin(), s.end(), item);
}

}  // namespace

double AssignmentDistribution::unassigned(std::size_t item) const {
  double s = 0.0;
  for (std::size_t i = 0; i < q.rows(); ++i) s += q(i, item);
  return 1.0 - s;
}

SparseFractionalAssignment dominate_to_target(const SparseFractionalAssignment& x,
                                              const MarginalMatrix& y_target) {
  const std::size_t n = x.bins();
  const std::size_t m = x.items();
  if (y_target.rows() != n || y_target.cols() != m) {
    throw ValidationError("target marginals have the wrong shape");
  }
  const MarginalMatrix current = phi(x);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      if (y_target(i, j) > current(i, j) + kTargetSlack || y_target(i, j) < 0.0) {
        throw ValidationError("target y[" + std::to_string(i) + "][" + std::to_string(j) +
                              "] is not dominated by phi(x)");
      }
    }
  }

  SparseFractionalAssignment out = x;
  for (std::size_t i = 0; i < n; ++i) {
    auto& comps = out.components(i);
    for (std::size_t j = 0; j < m; ++j) {
      double gap = std::max(0.0, current(i, j) - y_target(i, j));
      while (gap > 0.0) {
        auto it = std::find_if(comps.begin(), comps.end(), [&](const Component& c) {
          return c.mass > 0.0 && contains(c.items, j);
        });
        if (it == comps.end()) {
          // Only rounding residue can remain once every set holding j is peeled.
          if (gap > kTargetSlack) throw std::logic_error("dominate_to_target: mass exhausted");
          break;
        }
        ItemSet rest = without(it->items, j);
        if (it->mass <= gap) {
          const double moved = it->mass;
          gap -= moved;
          comps.erase(it);
          add_mass(comps, std::move(rest), moved);
        } else {
          it->mass -= gap;
          add_mass(comps, std::move(rest), gap);
          gap = 0.0;
        }
      }
    }
  }
  return out;
}

MarginalMatrix damp_marginals(const MarginalMatrix& y) {
  MarginalMatrix out(y.rows(), y.cols());
  auto in = y.flat();
  auto o = out.flat();
  for (std::size_t k = 0; k < in.size(); ++k) o[k] = -std::expm1(-in[k]);
  return out;
}

SparseFractionalAssignment damp_assignment(const SparseFractionalAssignment& x) {
  return dominate_to_target(x, damp_marginals(phi(x)));
}

double retention_probability(double y) {
  if (y <= 0.0) return 1.0;
  return -std::expm1(-y) / y;
}

Rounder::Rounder(const ItemPermutation& perm) {
  rank_.resize(perm.items());
  for (std::size_t j = 0; j < perm.items(); ++j) {
    rank_[j].resize(perm.order[j].size());
    for (std::size_t r = 0; r < perm.order[j].size(); ++r) rank_[j][perm.order[j][r]] = r;
  }
}

void Rounder::resolve(std::size_t bin, std::size_t item, std::span<std::size_t> owner) const {
  const std::size_t cur = owner[item];
  if (cur == kUnassigned || rank_[item][bin] < rank_[item][cur]) owner[item] = bin;
}

std::size_t Rounder::pick(const std::vector<Component>& comps, double u) {
  double acc = 0.0;
  for (std::size_t k = 0; k < comps.size(); ++k) {
    acc += comps[k].mass;
    if (u < acc) return k;
  }
  return comps.size();
}

RoundingOutcome Rounder::sample(std::uint64_t seed) const {
  std::vector<std::size_t> owner(items(), kUnassigned);
  RoundingOutcome out;
  out.seed = seed;
  draw(seed, owner, &out.raw_draws);
  out.allocation = owners_to_allocation(owner, bins());
  return out;
}

GreedyRounder::GreedyRounder(SparseFractionalAssignment damped, const ItemPermutation& perm)
    : Rounder(perm), damped_(std::move(damped)) {
  perm.check(damped_.bins());
}

void GreedyRounder::draw(std::uint64_t seed, std::span<std::size_t> owner,
                         std::vector<ItemSet>* raw) const {
  std::fill(owner.begin(), owner.end(), kUnassigned);
  if (raw) raw->assign(damped_.bins(), ItemSet{});
  for (std::size_t i = 0; i < damped_.bins(); ++i) {
    const auto& comps = damped_.components(i);
    const std::size_t k = pick(comps, counter_uniform(seed, Stream::kSetDraw, i));
    if (k == comps.size()) continue;
    for (std::size_t j : comps[k].items) resolve(i, j, owner);
    if (raw) (*raw)[i] = comps[k].items;
  }
}

SimplifiedRounder::SimplifiedRounder(SparseFractionalAssignment x, const ItemPermutation& perm)
    : Rounder(perm), x_(std::move(x)), keep_(phi(x_)) {
  perm.check(x_.bins());
  for (double& v : keep_.flat()) v = retention_probability(v);
}

void SimplifiedRounder::draw(std::uint64_t seed, std::span<std::size_t> owner,
                             std::vector<ItemSet>* raw) const {
  std::fill(owner.begin(), owner.end(), kUnassigned);
  if (raw) raw->assign(x_.bins(), ItemSet{});
  for (std::size_t i = 0; i < x_.bins(); ++i) {
    const auto& comps = x_.components(i);
    const std::size_t k = pick(comps, counter_uniform(seed, Stream::kSetDraw, i));
    if (k == comps.size()) continue;
    for (std::size_t j : comps[k].items) {
      if (counter_uniform(seed, Stream::kRetention, i, j) < keep_(i, j)) resolve(i, j, owner);
    }
    if (raw) (*raw)[i] = comps[k].items;
  }
}

RoundingOutcome round_parameterized(const SparseFractionalAssignment& x,
                                    const ItemPermutation& perm, std::uint64_t seed) {
  return GreedyRounder(damp_assignment(x), perm).sample(seed);
}

RoundingOutcome round_greedy(const SparseFractionalAssignment& x, const Instance& inst,
                             std::uint64_t seed) {
  return round_parameterized(x, value_sorted_permutation(inst), seed);
}

RoundingOutcome round_simplified(const SparseFractionalAssignment& x, const Instance& inst,
                                 std::uint64_t seed) {
  return SimplifiedRounder(x, value_sorted_permutation(inst)).sample(seed);
}

AssignmentDistribution assignment_distribution(const SparseFractionalAssignment& x_damped,
                                               const ItemPermutation& perm) {
  perm.check(x_damped.bins());
  const MarginalMatrix yd = phi(x_damped);
  AssignmentDistribution dist{Matrix(x_damped.bins(), x_damped.items())};
  for (std::size_t j = 0; j < x_damped.items(); ++j) {
    double survive = 1.0;
    for (std::size_t b : perm.order[j]) {
      const double p = std::clamp(yd(b, j), 0.0, 1.0);
      dist.q(b, j) = p * survive;
      survive *= 1.0 - p;
    }
  }
  return dist;
}

double expected_welfare(const Matrix& values, const AssignmentDistribution& dist) {
  return dot(values, dist.q);
}

Allocation owners_to_allocation(std::span<const std::size_t> owner, std::size_t bins) {
  Allocation a;
  a.sets.resize(bins);
  for (std::size_t j = 0; j < owner.size(); ++j) {
    if (owner[j] != kUnassigned) a.sets[owner[j]].push_back(j);
  }
  return a;
}

std::uint64_t sample_seed(std::uint64_t seed, std::uint64_t k) {
  return counter_hash(seed, Stream::kSample, k);
}

}  // namespace gapmech
