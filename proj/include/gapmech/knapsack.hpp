#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "gapmech/instance.hpp"

namespace gapmech {

/// 0/1 knapsack restricted to one bin: item profits, item weights, one capacity.
struct KnapsackProblem {
  std::vector<double> profits;
  std::vector<double> weights;
  double capacity = 0.0;

  std::size_t size() const { return profits.size(); }
};

/// Throws ValidationError on length mismatch or a negative / non-finite entry.
void validate_knapsack(const KnapsackProblem& p);

double knapsack_profit(const KnapsackProblem& p, const ItemSet& s);
bool knapsack_feasible(const KnapsackProblem& p, const ItemSet& s);

/// Profit-scaling FPTAS. The returned set fits exactly (weights summed in index
/// order are <= capacity) and its profit is at least (1 - eps) times the optimum.
/// Zero-profit items are never selected. eps must lie in (0, 1).
ItemSet knapsack_fptas(const KnapsackProblem& p, double eps);

struct KnapsackSolution {
  double value = 0.0;
  ItemSet items;
};

inline constexpr std::size_t kExhaustiveKnapsackLimit = 25;
inline constexpr double kKnapsackDpCellLimit = 1e7;

/// Exact optimum. Exhaustive over subsets for <= 25 items (ties: lexicographically
/// smallest index list); otherwise a capacity DP that needs integral weights and
/// capacity * items <= 1e7. Throws std::length_error when neither applies.
KnapsackSolution knapsack_exact(const KnapsackProblem& p);

}  // namespace gapmech
