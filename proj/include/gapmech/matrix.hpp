#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace gapmech {

/// Dense row-major bins x items matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

  std::span<double> flat() { return data_; }
  std::span<const double> flat() const { return data_; }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Entrywise inner product of two equally shaped matrices.
inline double dot(const Matrix& a, const Matrix& b) {
  double s = 0.0;
  auto fa = a.flat();
  auto fb = b.flat();
  for (std::size_t k = 0; k < fa.size(); ++k) s += fa[k] * fb[k];
  return s;
}

}  // namespace gapmech
