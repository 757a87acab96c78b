#include "gapmech/knapsack.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace gapmech {

void validate_knapsack(const KnapsackProblem& p) {
  if (p.profits.size() != p.weights.size()) {
    throw ValidationError("knapsack profits and weights differ in length");
  }
  auto bad = [](double x) { return !std::isfinite(x) || x < 0.0; };
  for (std::size_t t = 0; t < p.size(); ++t) {
    if (bad(p.profits[t]) || bad(p.weights[t])) {
      throw ValidationError("knapsack entry " + std::to_string(t) + " is negative or not finite");
    }
  }
  if (bad(p.capacity)) throw ValidationError("knapsack capacity is negative or not finite");
}

double knapsack_profit(const KnapsackProblem& p, const ItemSet& s) {
  double v = 0.0;
  for (std::size_t t : s) v += p.profits[t];
  return v;
}

bool knapsack_feasible(const KnapsackProblem& p, const ItemSet& s) {
  double w = 0.0;
  for (std::size_t t : s) w += p.weights[t];
  return w <= p.capacity;
}

ItemSet knapsack_fptas(const KnapsackProblem& p, double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw ValidationError("knapsack eps must lie in (0, 1)");
  validate_knapsack(p);

  std::vector<std::size_t> cand;
  double pmax = 0.0;
  for (std::size_t t = 0; t < p.size(); ++t) {
    if (p.profits[t] > 0.0 && p.weights[t] <= p.capacity) {
      cand.push_back(t);
      pmax = std::max(pmax, p.profits[t]);
    }
  }
  if (cand.empty()) return {};

  const std::size_t k = cand.size();
  const double scale = eps * pmax / static_cast<double>(k);
  std::vector<std::int64_t> q(k);
  std::int64_t total = 0;
  for (std::size_t t = 0; t < k; ++t) {
    q[t] = static_cast<std::int64_t>(std::floor(p.profits[cand[t]] / scale));
    total += q[t];
  }

  // least[t][s]: minimum weight of a subset of the first t candidates with scaled profit exactly s.
  const auto width = static_cast<std::size_t>(total + 1);
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> least((k + 1) * width, kInf);
  auto at = [&](std::size_t t, std::int64_t s) -> double& {
    return least[t * width + static_cast<std::size_t>(s)];
  };
  at(0, 0) = 0.0;
  for (std::size_t t = 1; t <= k; ++t) {
    const double w = p.weights[cand[t - 1]];
    const std::int64_t qt = q[t - 1];
    for (std::int64_t s = 0; s <= total; ++s) {
      double best = at(t - 1, s);
      if (s >= qt) {
        const double prev = at(t - 1, s - qt);
        if (prev != kInf && prev + w < best) best = prev + w;
      }
      at(t, s) = best;
    }
  }

  std::int64_t s = total;
  while (s > 0 && !(at(k, s) <= p.capacity)) --s;

  ItemSet chosen;
  for (std::size_t t = k; t >= 1; --t) {
    if (at(t, s) == at(t - 1, s)) continue;  // excluding reaches the same weight
    chosen.push_back(cand[t - 1]);
    s -= q[t - 1];
  }
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

namespace {

ItemSet mask_to_set(std::uint64_t mask, std::size_t n) {
  ItemSet s;
  for (std::size_t t = 0; t < n; ++t) {
    if (mask >> t & 1U) s.push_back(t);
  }
  return s;
}

KnapsackSolution exhaustive(const KnapsackProblem& p) {
  const std::size_t n = p.size();
  const std::uint64_t limit = std::uint64_t{1} << n;
  double best_value = 0.0;
  std::uint64_t best_mask = 0;
  for (std::uint64_t mask = 1; mask < limit; ++mask) {
    double w = 0.0;
    double v = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      if (mask >> t & 1U) {
        w += p.weights[t];
        v += p.profits[t];
      }
    }
    if (!(w <= p.capacity)) continue;
    if (v > best_value) {
      best_value = v;
      best_mask = mask;
    } else if (v == best_value) {
      if (mask_to_set(mask, n) < mask_to_set(best_mask, n)) best_mask = mask;
    }
  }
  return {best_value, mask_to_set(best_mask, n)};
}

KnapsackSolution capacity_dp(const KnapsackProblem& p) {
  const std::size_t n = p.size();
  for (double w : p.weights) {
    if (w != std::floor(w)) {
      throw std::length_error("knapsack_exact: more than 25 items and non-integral weights");
    }
  }
  const double cap_d = std::floor(p.capacity);
  if (cap_d * static_cast<double>(n) > kKnapsackDpCellLimit) {
    throw std::length_error("knapsack_exact: capacity * items exceeds DP limit");
  }
  const auto cap = static_cast<std::size_t>(cap_d);
  std::vector<double> best(cap + 1, 0.0);
  std::vector<std::vector<bool>> take(n, std::vector<bool>(cap + 1, false));
  for (std::size_t t = 0; t < n; ++t) {
    const auto w = static_cast<std::size_t>(p.weights[t]);
    if (w > cap || p.profits[t] <= 0.0) continue;
    for (std::size_t c = cap + 1; c-- > w;) {
      const double with = best[c - w] + p.profits[t];
      if (with > best[c]) {
        best[c] = with;
        take[t][c] = true;
      }
    }
  }
  ItemSet s;
  std::size_t c = cap;
  for (std::size_t t = n; t-- > 0;) {
    if (take[t][c]) {
      s.push_back(t);
      c -= static_cast<std::size_t>(p.weights[t]);
    }
  }
  std::sort(s.begin(), s.end());
  return {knapsack_profit(p, s), s};
}

}  // namespace

KnapsackSolution knapsack_exact(const KnapsackProblem& p) {
  validate_knapsack(p);
  if (p.size() <= kExhaustiveKnapsackLimit) return exhaustive(p);
  return capacity_dp(p);
}

}  // namespace gapmech
