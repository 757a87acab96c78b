#include "gapmech/objective.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace gapmech {

void SparseFractionalAssignment::add(std::size_t bin, ItemSet set, double mass) {
  std::sort(set.begin(), set.end());
  set.erase(std::unique(set.begin(), set.end()), set.end());
  if (set.empty() || mass == 0.0) return;
  auto& comps = per_bin_[bin];
  for (auto& c : comps) {
    if (c.items == set) {
      c.mass += mass;
      return;
    }
  }
  comps.push_back(Component{std::move(set), mass});
}

double SparseFractionalAssignment::bin_mass(std::size_t bin) const {
  double s = 0.0;
  for (const auto& c : per_bin_[bin]) s += c.mass;
  return s;
}

std::size_t SparseFractionalAssignment::component_count() const {
  std::size_t k = 0;
  for (const auto& comps : per_bin_) {
    for (const auto& c : comps) k += c.mass > 0.0 ? 1 : 0;
  }
  return k;
}

MarginalMatrix phi(const SparseFractionalAssignment& x) {
  MarginalMatrix y(x.bins(), x.items());
  for (std::size_t i = 0; i < x.bins(); ++i) {
    for (const auto& c : x.components(i)) {
      for (std::size_t j : c.items) y(i, j) += c.mass;
    }
  }
  return y;
}

void check_marginals(const MarginalMatrix& y, std::size_t bins, std::size_t items, double tol) {
  if (y.rows() != bins || y.cols() != items) {
    throw ValidationError("marginal matrix has shape " + std::to_string(y.rows()) + "x" +
                          std::to_string(y.cols()) + ", expected " + std::to_string(bins) + "x" +
                          std::to_string(items));
  }
  for (std::size_t i = 0; i < bins; ++i) {
    for (std::size_t j = 0; j < items; ++j) {
      const double v = y(i, j);
      if (!(v >= -tol && v <= 1.0 + tol)) {
        throw ValidationError("marginal y[" + std::to_string(i) + "][" + std::to_string(j) +
                              "] = " + std::to_string(v) + " outside [0,1]");
      }
    }
  }
}

double item_objective(const Matrix& values, const ItemPermutation& perm, const MarginalMatrix& y,
                      std::size_t item) {
  const auto& order = perm.order[item];
  const std::size_t n = order.size();
  double prefix = 0.0;
  double total = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    const std::size_t b = order[r];
    prefix += y(b, item);
    const double next = r + 1 < n ? values(order[r + 1], item) : 0.0;
    total += (values(b, item) - next) * -std::expm1(-prefix);
  }
  return total;
}

void item_gradient(const Matrix& values, const ItemPermutation& perm, const MarginalMatrix& y,
                   std::size_t item, Matrix& grad) {
  const auto& order = perm.order[item];
  const std::size_t n = order.size();
  // Prefix sums in sorted order, then suffix-accumulate the weighted exponentials.
  std::vector<double> decay(n);
  double prefix = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    prefix += y(order[r], item);
    const double next = r + 1 < n ? values(order[r + 1], item) : 0.0;
    decay[r] = (values(order[r], item) - next) * std::exp(-prefix);
  }
  double suffix = 0.0;
  for (std::size_t r = n; r-- > 0;) {
    suffix += decay[r];
    grad(order[r], item) = suffix;
  }
}

double eval_F_serial(const Matrix& values, const ItemPermutation& perm, const MarginalMatrix& y) {
  double total = 0.0;
  for (std::size_t j = 0; j < values.cols(); ++j) total += item_objective(values, perm, y, j);
  return total;
}

Matrix grad_F_serial(const Matrix& values, const ItemPermutation& perm, const MarginalMatrix& y) {
  Matrix grad(values.rows(), values.cols());
  for (std::size_t j = 0; j < values.cols(); ++j) item_gradient(values, perm, y, j, grad);
  return grad;
}

double eval_F(const Matrix& values, const ItemPermutation& perm, const MarginalMatrix& y) {
  if (values.size() >= kParallelObjectiveThreshold) return eval_F_parallel(values, perm, y);
  return eval_F_serial(values, perm, y);
}

Matrix grad_F(const Matrix& values, const ItemPermutation& perm, const MarginalMatrix& y) {
  if (values.size() >= kParallelObjectiveThreshold) return grad_F_parallel(values, perm, y);
  return grad_F_serial(values, perm, y);
}

double eval_F(const Instance& inst, const ItemPermutation& perm, const MarginalMatrix& y) {
  return eval_F(inst.values, perm, y);
}

Matrix grad_F(const Instance& inst, const ItemPermutation& perm, const MarginalMatrix& y) {
  return grad_F(inst.values, perm, y);
}

}  // namespace gapmech
