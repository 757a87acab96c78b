#include "gapmech/instance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <omp.h>

namespace gapmech {

double Instance::max_value() const {
  double m = 0.0;
  for (double v : values.flat()) m = std::max(m, v);
  return m;
}

double Instance::allocatable_max_value() const {
  double m = 0.0;
  for (std::size_t i = 0; i < bins(); ++i) {
    for (std::size_t j = 0; j < items(); ++j) {
      if (weights(i, j) <= capacities[i]) m = std::max(m, values(i, j));
    }
  }
  return m;
}

void ItemPermutation::check(std::size_t bins) const {
  for (std::size_t j = 0; j < order.size(); ++j) {
    const auto& row = order[j];
    if (row.size() != bins) {
      throw ValidationError("permutation for item " + std::to_string(j) + " has wrong length");
    }
    std::vector<bool> seen(bins, false);
    for (std::size_t b : row) {
      if (b >= bins || seen[b]) {
        throw ValidationError("permutation for item " + std::to_string(j) + " is not a permutation");
      }
      seen[b] = true;
    }
  }
}

namespace {

void check_entry(double x, const char* what, std::size_t i, std::size_t j) {
  if (!std::isfinite(x)) {
    throw ValidationError(std::string(what) + "[" + std::to_string(i) + "][" + std::to_string(j) +
                          "] is not finite");
  }
  if (x < 0.0) {
    throw ValidationError(std::string(what) + "[" + std::to_string(i) + "][" + std::to_string(j) +
                          "] is negative");
  }
}

Matrix copy_rows(const std::vector<std::vector<double>>& rows, std::size_t n, std::size_t m,
                 const char* what) {
  if (rows.size() != n) {
    throw ValidationError(std::string(what) + " has " + std::to_string(rows.size()) +
                          " rows, expected " + std::to_string(n));
  }
  Matrix out(n, m);
  for (std::size_t i = 0; i < n; ++i) {
    if (rows[i].size() != m) {
      throw ValidationError(std::string(what) + " row " + std::to_string(i) + " has " +
                            std::to_string(rows[i].size()) + " columns, expected " +
                            std::to_string(m));
    }
    for (std::size_t j = 0; j < m; ++j) {
      check_entry(rows[i][j], what, i, j);
      out(i, j) = rows[i][j];
    }
  }
  return out;
}

}  // namespace

Instance validate_instance(const RawInstance& raw) {
  if (raw.n < 1) throw ValidationError("n must be at least 1");
  if (raw.m < 1) throw ValidationError("m must be at least 1");
  const auto n = static_cast<std::size_t>(raw.n);
  const auto m = static_cast<std::size_t>(raw.m);
  if (raw.capacities.size() != n) {
    throw ValidationError("capacities has length " + std::to_string(raw.capacities.size()) +
                          ", expected " + std::to_string(n));
  }
  Instance inst;
  inst.values = copy_rows(raw.values, n, m, "values");
  inst.weights = copy_rows(raw.weights, n, m, "weights");
  inst.capacities = raw.capacities;
  for (std::size_t i = 0; i < n; ++i) check_entry(inst.capacities[i], "capacities", i, 0);
  return inst;
}

void validate_instance(const Instance& inst) {
  const std::size_t n = inst.values.rows();
  const std::size_t m = inst.values.cols();
  if (n < 1) throw ValidationError("n must be at least 1");
  if (m < 1) throw ValidationError("m must be at least 1");
  if (inst.weights.rows() != n || inst.weights.cols() != m) {
    throw ValidationError("weights shape does not match values");
  }
  if (inst.capacities.size() != n) throw ValidationError("capacities length does not match n");
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      check_entry(inst.values(i, j), "values", i, j);
      check_entry(inst.weights(i, j), "weights", i, j);
    }
    check_entry(inst.capacities[i], "capacities", i, 0);
  }
}

double set_weight(const Instance& inst, std::size_t bin, const ItemSet& s) {
  double w = 0.0;
  for (std::size_t j : s) w += inst.weights(bin, j);
  return w;
}

bool is_feasible_set(const Instance& inst, std::size_t bin, const ItemSet& s) {
  return set_weight(inst, bin, s) <= inst.capacities[bin];
}

bool is_feasible_allocation(const Instance& inst, const Allocation& a) {
  if (a.sets.size() != inst.bins()) return false;
  std::vector<bool> taken(inst.items(), false);
  for (std::size_t i = 0; i < a.sets.size(); ++i) {
    for (std::size_t j : a.sets[i]) {
      if (j >= inst.items() || taken[j]) return false;
      taken[j] = true;
    }
    if (!is_feasible_set(inst, i, a.sets[i])) return false;
  }
  return true;
}

double bin_value(const Instance& inst, std::size_t bin, const ItemSet& s) {
  if (!is_feasible_set(inst, bin, s)) return 0.0;
  double v = 0.0;
  for (std::size_t j : s) v += inst.values(bin, j);
  return v;
}

double allocation_welfare(const Instance& inst, const Allocation& a) {
  double total = 0.0;
  for (std::size_t i = 0; i < a.sets.size(); ++i) total += bin_value(inst, i, a.sets[i]);
  return total;
}

std::vector<std::size_t> sort_bins_for_item(const Instance& inst, std::size_t item) {
  std::vector<std::size_t> order(inst.bins());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return inst.values(a, item) > inst.values(b, item);
  });
  return order;
}

ItemPermutation value_sorted_permutation(const Matrix& values) {
  ItemPermutation perm;
  perm.order.resize(values.cols());
  for (std::size_t j = 0; j < values.cols(); ++j) {
    auto& order = perm.order[j];
    order.resize(values.rows());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return values(a, j) > values(b, j);
    });
  }
  return perm;
}

ItemPermutation value_sorted_permutation(const Instance& inst) {
  return value_sorted_permutation(inst.values);
}

std::uint64_t enumeration_size(std::size_t bins, std::size_t items) {
  const std::uint64_t base = bins + 1;
  std::uint64_t total = 1;
  for (std::size_t j = 0; j < items; ++j) {
    if (total > std::numeric_limits<std::uint64_t>::max() / base) {
      return std::numeric_limits<std::uint64_t>::max();
    }
    total *= base;
  }
  return total;
}

Allocation decode_item_map(std::uint64_t code, std::size_t bins, std::size_t items) {
  Allocation a;
  a.sets.resize(bins);
  for (std::size_t j = 0; j < items; ++j) {
    const std::size_t digit = code % (bins + 1);
    code /= (bins + 1);
    if (digit < bins) a.sets[digit].push_back(j);
  }
  return a;
}

namespace {

struct Best {
  double value = -1.0;
  std::uint64_t code = 0;

  void offer(double v, std::uint64_t c) {
    if (v > value || (v == value && c < code)) {
      value = v;
      code = c;
    }
  }
};

// Scans codes [begin, end). Welfare is accumulated in ascending item order so
// that every scan over the same code produces the identical double.
Best scan_codes(const Instance& inst, std::uint64_t begin, std::uint64_t end) {
  const std::size_t n = inst.bins();
  const std::size_t m = inst.items();
  std::vector<double> load(n);
  std::vector<std::size_t> digits(m);
  Best best;
  for (std::uint64_t code = begin; code < end; ++code) {
    std::uint64_t c = code;
    for (std::size_t j = 0; j < m; ++j) {
      digits[j] = c % (n + 1);
      c /= (n + 1);
    }
    std::fill(load.begin(), load.end(), 0.0);
    for (std::size_t j = 0; j < m; ++j) {
      if (digits[j] < n) load[digits[j]] += inst.weights(digits[j], j);
    }
    bool ok = true;
    for (std::size_t i = 0; i < n && ok; ++i) ok = load[i] <= inst.capacities[i];
    if (!ok) continue;
    double welfare = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      if (digits[j] < n) welfare += inst.values(digits[j], j);
    }
    best.offer(welfare, code);
  }
  return best;
}

std::uint64_t checked_size(const Instance& inst, std::uint64_t cap) {
  const std::uint64_t total = enumeration_size(inst.bins(), inst.items());
  if (total > cap) {
    throw std::length_error("brute force enumeration of " + std::to_string(total) +
                            " item maps exceeds cap " + std::to_string(cap));
  }
  return total;
}

BruteForceResult finish(const Instance& inst, const Best& best) {
  // The empty map (code of all-"none" digits) is always feasible, so best.value >= 0.
  BruteForceResult r;
  r.value = best.value;
  r.allocation = decode_item_map(best.code, inst.bins(), inst.items());
  return r;
}

}  // namespace

BruteForceResult brute_force_opt(const Instance& inst, std::uint64_t cap) {
  const std::uint64_t total = checked_size(inst, cap);
  return finish(inst, scan_codes(inst, 0, total));
}

BruteForceResult brute_force_opt_parallel(const Instance& inst, std::uint64_t cap) {
  const std::uint64_t total = checked_size(inst, cap);
  constexpr std::int64_t kChunks = 256;
  std::vector<Best> partial(kChunks);
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t c = 0; c < kChunks; ++c) {
    const std::uint64_t begin = total * static_cast<std::uint64_t>(c) / kChunks;
    const std::uint64_t end = total * static_cast<std::uint64_t>(c + 1) / kChunks;
    partial[c] = scan_codes(inst, begin, end);
  }
  Best best;
  for (const auto& p : partial) {
    if (p.value >= 0.0) best.offer(p.value, p.code);
  }
  return finish(inst, best);
}

}  // namespace gapmech
