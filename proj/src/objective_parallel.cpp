#include <cstdint>
#include <vector>

#include <omp.h>

#include "gapmech/objective.hpp"

namespace gapmech {

// Items are independent; per-item terms are reduced in item order afterwards
// so the sum matches eval_F_serial bit for bit.
double eval_F_parallel(const Matrix& values, const ItemPermutation& perm, const MarginalMatrix& y) {
  const auto m = static_cast<std::int64_t>(values.cols());
  std::vector<double> terms(values.cols());
#pragma omp parallel for schedule(static)
  for (std::int64_t j = 0; j < m; ++j) {
    terms[j] = item_objective(values, perm, y, static_cast<std::size_t>(j));
  }
  double total = 0.0;
  for (double t : terms) total += t;
  return total;
}

Matrix grad_F_parallel(const Matrix& values, const ItemPermutation& perm, const MarginalMatrix& y) {
  Matrix grad(values.rows(), values.cols());
  const auto m = static_cast<std::int64_t>(values.cols());
#pragma omp parallel for schedule(static)
  for (std::int64_t j = 0; j < m; ++j) {
    item_gradient(values, perm, y, static_cast<std::size_t>(j), grad);
  }
  return grad;
}

}  // namespace gapmech
