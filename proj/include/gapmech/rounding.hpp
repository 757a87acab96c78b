#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "gapmech/instance.hpp"
#include "gapmech/objective.hpp"

namespace gapmech {

inline constexpr std::size_t kUnassigned = std::numeric_limits<std::size_t>::max();

struct RoundingOutcome {
  Allocation allocation;
  std::vector<ItemSet> raw_draws;  // per bin, the set drawn before conflict resolution
  std::uint64_t seed = 0;
};

/// Final-assignment law of a rounding: q(i, j) = P[item j ends at bin i].
struct AssignmentDistribution {
  Matrix q;

  double unassigned(std::size_t item) const;
};

/// Moves mass of x from sets S to S \ {j} until phi(x') == y_target. Components
/// are visited in insertion order. Throws ValidationError if y_target exceeds
/// phi(x) anywhere (beyond 1e-12) or has the wrong shape.
SparseFractionalAssignment dominate_to_target(const SparseFractionalAssignment& x,
                                              const MarginalMatrix& y_target);

/// Entrywise 1 - exp(-y).
MarginalMatrix damp_marginals(const MarginalMatrix& y);

/// x' with phi(x') = 1 - exp(-phi(x)): step 1 of the greedy rounding.
SparseFractionalAssignment damp_assignment(const SparseFractionalAssignment& x);

/// P[bin keeps item] in the simplified rounder: (1 - e^{-y}) / y, and 1 at y = 0.
double retention_probability(double y);

/// A prepared rounding: one independent set draw per bin, then conflicts are
/// resolved by the per-item bin order (earliest bin wins).
class Rounder {
 public:
  virtual ~Rounder() = default;

  std::size_t bins() const { return rank_.empty() ? 0 : rank_[0].size(); }
  std::size_t items() const { return rank_.size(); }

  /// Writes the winning bin of every item (kUnassigned if none) into owner.
  /// raw, when non-null, receives each bin's pre-conflict set.
  virtual void draw(std::uint64_t seed, std::span<std::size_t> owner,
                    std::vector<ItemSet>* raw = nullptr) const = 0;

  RoundingOutcome sample(std::uint64_t seed) const;

 protected:
  explicit Rounder(const ItemPermutation& perm);
  void resolve(std::size_t bin, std::size_t item, std::span<std::size_t> owner) const;
  /// Index of the component drawn for a bin, or components.size() for "no set".
  static std::size_t pick(const std::vector<Component>& comps, double u);

  std::vector<std::vector<std::size_t>> rank_;  // rank_[j][bin] = position of bin in order j
};

/// Samples from an already damped assignment x'.
class GreedyRounder final : public Rounder {
 public:
  GreedyRounder(SparseFractionalAssignment damped, const ItemPermutation& perm);

  void draw(std::uint64_t seed, std::span<std::size_t> owner,
            std::vector<ItemSet>* raw = nullptr) const override;

  const SparseFractionalAssignment& damped() const { return damped_; }

 private:
  SparseFractionalAssignment damped_;
};

/// Samples sets straight from x, then keeps each drawn (bin, item) with
/// probability (1 - e^{-y})/y before resolving conflicts.
class SimplifiedRounder final : public Rounder {
 public:
  SimplifiedRounder(SparseFractionalAssignment x, const ItemPermutation& perm);

  void draw(std::uint64_t seed, std::span<std::size_t> owner,
            std::vector<ItemSet>* raw = nullptr) const override;

 private:
  SparseFractionalAssignment x_;
  Matrix keep_;
};

RoundingOutcome round_parameterized(const SparseFractionalAssignment& x,
                                    const ItemPermutation& perm, std::uint64_t seed);
RoundingOutcome round_greedy(const SparseFractionalAssignment& x, const Instance& inst,
                             std::uint64_t seed);
RoundingOutcome round_simplified(const SparseFractionalAssignment& x, const Instance& inst,
                                 std::uint64_t seed);

/// Closed-form law: q(s(r), j) = y'(s(r), j) * prod_{k<r} (1 - y'(s(k), j)) with y' = phi(x_damped).
AssignmentDistribution assignment_distribution(const SparseFractionalAssignment& x_damped,
                                               const ItemPermutation& perm);

/// sum_ij q(i,j) * values(i,j).
double expected_welfare(const Matrix& values, const AssignmentDistribution& dist);

Allocation owners_to_allocation(std::span<const std::size_t> owner, std::size_t bins);

// Monte Carlo kernels. Sample k uses seed counter_hash(seed, kSample, k), so the
// serial and OpenMP versions visit the same outcomes. Partial sums are formed
// over fixed blocks and combined in block order, making the parallel result
// independent of the thread count.

struct MonteCarloEstimate {
  double mean = 0.0;
  double stderr_ = 0.0;
  std::uint64_t samples = 0;
};

MonteCarloEstimate monte_carlo_welfare_serial(const Rounder& r, const Matrix& values,
                                              std::uint64_t samples, std::uint64_t seed);
MonteCarloEstimate monte_carlo_welfare(const Rounder& r, const Matrix& values,
                                       std::uint64_t samples, std::uint64_t seed);

/// counts(i, j) = number of samples in which item j ended at bin i.
Matrix assignment_counts_serial(const Rounder& r, std::uint64_t samples, std::uint64_t seed);
Matrix assignment_counts(const Rounder& r, std::uint64_t samples, std::uint64_t seed);

std::uint64_t sample_seed(std::uint64_t seed, std::uint64_t k);

}  // namespace gapmech
