#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gapmech/matrix.hpp"

namespace gapmech {

/// Raised when an input violates a documented invariant. The CLI maps it to exit code 1.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Sorted, duplicate-free list of item indices.
using ItemSet = std::vector<std::size_t>;

/// A generalized assignment instance: n bins, m items, per-(bin, item) value
/// and weight, per-bin capacity.
struct Instance {
  Matrix values;                  // n x m, utility units
  Matrix weights;                 // n x m, capacity units
  std::vector<double> capacities; // n

  std::size_t bins() const { return values.rows(); }
  std::size_t items() const { return values.cols(); }

  /// Largest value entry (the scale M used by the local search stopping rule).
  double max_value() const;
  /// Largest value over pairs whose item fits the bin on its own. Other pairs
  /// can never be allocated, so they carry no weight in any objective.
  double allocatable_max_value() const;
};

/// Raw, not-yet-checked instance data as read from a file.
struct RawInstance {
  std::int64_t n = 0;
  std::int64_t m = 0;
  std::vector<double> capacities;
  std::vector<std::vector<double>> values;
  std::vector<std::vector<double>> weights;
};

/// Per item j, an ordering of bins; order[j][0] is the bin that wins item j in a conflict.
struct ItemPermutation {
  std::vector<std::vector<std::size_t>> order;

  std::size_t items() const { return order.size(); }
  /// Throws ValidationError unless every row is a permutation of {0..bins-1}.
  void check(std::size_t bins) const;
};

/// One item subset per bin. Unassigned items are implicit.
struct Allocation {
  std::vector<ItemSet> sets;

  bool operator==(const Allocation&) const = default;
};

Instance validate_instance(const RawInstance& raw);
/// Re-checks an already assembled instance; throws ValidationError on the first violation.
void validate_instance(const Instance& inst);

double set_weight(const Instance& inst, std::size_t bin, const ItemSet& s);
bool is_feasible_set(const Instance& inst, std::size_t bin, const ItemSet& s);

/// True iff the sets are pairwise disjoint and each one fits its bin.
bool is_feasible_allocation(const Instance& inst, const Allocation& a);

/// g_i(S): additive value of S for bin i, or 0 when S overflows the bin.
double bin_value(const Instance& inst, std::size_t bin, const ItemSet& s);
double allocation_welfare(const Instance& inst, const Allocation& a);

/// Bins ordered by non-increasing value for item j; ties go to the lower bin index.
std::vector<std::size_t> sort_bins_for_item(const Instance& inst, std::size_t item);
ItemPermutation value_sorted_permutation(const Instance& inst);
ItemPermutation value_sorted_permutation(const Matrix& values);

struct BruteForceResult {
  double value = 0.0;
  Allocation allocation;
};

inline constexpr std::uint64_t kDefaultEnumerationCap = 10'000'000;

/// Number of item -> (bin | none) maps, saturating at UINT64_MAX.
std::uint64_t enumeration_size(std::size_t bins, std::size_t items);

/// Exhaustive optimum over all (n+1)^m item maps. Throws std::length_error past the cap.
/// Among optimal maps the one with the smallest mixed-radix code wins.
BruteForceResult brute_force_opt(const Instance& inst,
                                 std::uint64_t cap = kDefaultEnumerationCap);
/// Same enumeration split across OpenMP threads; result identical to the serial one.
BruteForceResult brute_force_opt_parallel(const Instance& inst,
                                          std::uint64_t cap = kDefaultEnumerationCap);

/// Decodes a mixed-radix item map code into an allocation (digit n means unassigned).
Allocation decode_item_map(std::uint64_t code, std::size_t bins, std::size_t items);

}  // namespace gapmech
