#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <vector>

#include "gapmech/instance.hpp"
#include "gapmech/objective.hpp"

namespace gapmech {

/// Parameters of the fractional local search. Build with SearchConfig::make.
struct SearchConfig {
  double eps = 0.1;
  double delta = 0.0;          // eps / (6 m n^2)
  std::size_t z_cap = 0;       // floor(1 / delta)
  std::uint64_t max_iters = 0; // ceil(12 m^2 n^2 / eps^2)
  std::uint64_t rng_seed = 0;  // unused: the search is deterministic

  static SearchConfig make(double eps, std::size_t bins, std::size_t items);
  /// Throws ValidationError when eps is outside (0, 1) or the derived fields disagree with eps.
  void check(std::size_t bins, std::size_t items) const;
};

struct IterationRecord {
  double objective = 0.0;  // F(y) at the start of the iteration
  double gap = 0.0;        // (z - y) . grad F(y)
  std::size_t pool_size = 0;  // |Z| after the iteration
  bool stepped = false;
  bool swapped = false;
};

struct SearchTrace {
  std::vector<IterationRecord> iterations;
  double final_objective = 0.0;
  double scale = 0.0;          // M, the largest reported value
  std::uint64_t steps = 0;
  bool hit_max_iters = false;
  bool guarantee_void = false; // eps > 1/n
};

/// The multiset Z of indicator matrices, stored as distinct patterns with the
/// insertion stamps of their copies.
class IndicatorPool {
 public:
  using Bits = std::vector<std::uint8_t>;

  struct Pattern {
    Bits bits;  // row-major bins x items
    std::deque<std::uint64_t> stamps;
  };

  IndicatorPool(std::size_t bins, std::size_t items) : bins_(bins), items_(items) {}

  std::size_t size() const { return size_; }
  const std::vector<Pattern>& patterns() const { return patterns_; }

  void add(const Bits& bits, std::uint64_t stamp);
  /// Removes one copy of argmin_{z in Z} z . u; ties go to the oldest copy. Returns its bits.
  Bits evict_min(const Matrix& u);
  /// delta * sum_{z in Z} z, recomputed from the stored patterns.
  Matrix scaled_sum(double delta) const;

 private:
  std::size_t bins_;
  std::size_t items_;
  std::size_t size_ = 0;
  std::vector<Pattern> patterns_;
  std::map<Bits, std::size_t> index_;
};

struct SearchSnapshot {
  std::uint64_t iteration;
  const MarginalMatrix& y;
  const IndicatorPool::Bits& chosen;
  const IndicatorPool& pool;
  double delta;
};

using SearchObserver = std::function<void(const SearchSnapshot&)>;

struct SearchResult {
  SparseFractionalAssignment x;
  MarginalMatrix y;
  SearchTrace trace;
  double objective = 0.0;
};

/// Fractional local search maximizing F over the polytope P. Deterministic.
/// The observer, when set, runs after every step that changes Z.
SearchResult maximize_F(const Instance& inst, const SearchConfig& cfg,
                        const SearchObserver& observer = {});

struct MembershipReport {
  std::vector<double> bin_mass;
  std::vector<std::pair<std::size_t, ItemSet>> infeasible_sets;
  std::vector<std::size_t> overfull_bins;
  std::size_t positive_components = 0;

  bool ok() const { return infeasible_sets.empty() && overfull_bins.empty(); }
};

/// Checks x against the polytope R: per-bin mass <= 1 + tol and every set fits its bin.
MembershipReport certify_membership(const Instance& inst, const SparseFractionalAssignment& x,
                                    double tol = 1e-9);

}  // namespace gapmech
