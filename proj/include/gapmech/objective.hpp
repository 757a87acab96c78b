#pragma once

#include <cstddef>
#include <vector>

#include "gapmech/instance.hpp"
#include "gapmech/matrix.hpp"

namespace gapmech {

/// Per-(bin, item) fractional assignment mass y in [0,1]^{n x m}.
using MarginalMatrix = Matrix;

/// A (set, mass) pair of a fractional assignment.
struct Component {
  ItemSet items;
  double mass = 0.0;
};

/// Probability mass over (bin, item-subset) pairs: a point of the polytope R.
/// Components of a bin are kept in insertion order; a set appears at most once per bin.
class SparseFractionalAssignment {
 public:
  SparseFractionalAssignment() = default;
  SparseFractionalAssignment(std::size_t bins, std::size_t items)
      : items_(items), per_bin_(bins) {}

  std::size_t bins() const { return per_bin_.size(); }
  std::size_t items() const { return items_; }

  const std::vector<Component>& components(std::size_t bin) const { return per_bin_[bin]; }
  std::vector<Component>& components(std::size_t bin) { return per_bin_[bin]; }

  /// Adds mass to (bin, set), merging with an existing component for the same set.
  /// The set is sorted and deduplicated first.
  /// Empty sets carry no marginal mass and are dropped.
  void add(std::size_t bin, ItemSet set, double mass);

  double bin_mass(std::size_t bin) const;
  std::size_t component_count() const;

 private:
  std::size_t items_ = 0;
  std::vector<std::vector<Component>> per_bin_;
};

/// Marginal map: y[i][j] = sum of the masses of bin i's sets that contain j.
MarginalMatrix phi(const SparseFractionalAssignment& x);

/// Throws ValidationError if any entry of y lies outside [0, 1] (up to tol) or the shape is wrong.
void check_marginals(const MarginalMatrix& y, std::size_t bins, std::size_t items,
                     double tol = 1e-9);

// The concave surrogate
//
//   F(y) = sum_j sum_i (v[s_j(i)][j] - v[s_j(i+1)][j]) * (1 - exp(-sum_{k<=i} y[s_j(k)][j]))
//
// with s_j the supplied per-item bin order and v[s_j(n+1)][j] = 0. The order is
// a parameter so that callers can evaluate F with modified values while keeping
// the original order (Clarke pivots need exactly that).

/// Contribution of a single item to F.
double item_objective(const Matrix& values, const ItemPermutation& perm, const MarginalMatrix& y,
                      std::size_t item);

double eval_F(const Instance& inst, const ItemPermutation& perm, const MarginalMatrix& y);
double eval_F(const Matrix& values, const ItemPermutation& perm, const MarginalMatrix& y);

/// dF/dy[i][j] = sum_{l >= rank of i in s_j} (v_l - v_{l+1}) exp(-prefix_l), in original bin indexing.
Matrix grad_F(const Instance& inst, const ItemPermutation& perm, const MarginalMatrix& y);
Matrix grad_F(const Matrix& values, const ItemPermutation& perm, const MarginalMatrix& y);

/// Single-threaded reference kernels. eval_F / grad_F dispatch to the OpenMP
/// kernels above a size threshold; both paths produce bit-identical results.
double eval_F_serial(const Matrix& values, const ItemPermutation& perm, const MarginalMatrix& y);
Matrix grad_F_serial(const Matrix& values, const ItemPermutation& perm, const MarginalMatrix& y);
double eval_F_parallel(const Matrix& values, const ItemPermutation& perm, const MarginalMatrix& y);
Matrix grad_F_parallel(const Matrix& values, const ItemPermutation& perm, const MarginalMatrix& y);

/// Fills column j of grad with the partial derivatives for item j.
void item_gradient(const Matrix& values, const ItemPermutation& perm, const MarginalMatrix& y,
                   std::size_t item, Matrix& grad);

/// n*m at or above which eval_F / grad_F use the OpenMP kernels.
inline constexpr std::size_t kParallelObjectiveThreshold = 4096;

}  // namespace gapmech
