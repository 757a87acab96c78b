#include <cmath>
#include <cstdint>
#include <vector>

#include <omp.h>

#include "gapmech/rounding.hpp"

namespace gapmech {

namespace {

constexpr std::int64_t kBlocks = 64;

struct Moments {
  double sum = 0.0;
  double sum_sq = 0.0;
};

std::uint64_t block_begin(std::uint64_t samples, std::int64_t b) {
  return samples * static_cast<std::uint64_t>(b) / kBlocks;
}

Moments welfare_block(const Rounder& r, const Matrix& values, std::uint64_t seed,
                      std::uint64_t begin, std::uint64_t end) {
  std::vector<std::size_t> owner(r.items());
  Moments mo;
  for (std::uint64_t k = begin; k < end; ++k) {
    r.draw(sample_seed(seed, k), owner);
    double w = 0.0;
    for (std::size_t j = 0; j < owner.size(); ++j) {
      if (owner[j] != kUnassigned) w += values(owner[j], j);
    }
    mo.sum += w;
    mo.sum_sq += w * w;
  }
  return mo;
}

MonteCarloEstimate summarize(const std::vector<Moments>& blocks, std::uint64_t samples) {
  Moments total;
  for (const auto& b : blocks) {
    total.sum += b.sum;
    total.sum_sq += b.sum_sq;
  }
  MonteCarloEstimate est;
  est.samples = samples;
  if (samples == 0) return est;
  const double n = static_cast<double>(samples);
  est.mean = total.sum / n;
  if (samples > 1) {
    const double var = std::max(0.0, (total.sum_sq - n * est.mean * est.mean) / (n - 1.0));
    est.stderr_ = std::sqrt(var / n);
  }
  return est;
}

void count_block(const Rounder& r, std::uint64_t seed, std::uint64_t begin, std::uint64_t end,
                 Matrix& counts) {
  std::vector<std::size_t> owner(r.items());
  for (std::uint64_t k = begin; k < end; ++k) {
    r.draw(sample_seed(seed, k), owner);
    for (std::size_t j = 0; j < owner.size(); ++j) {
      if (owner[j] != kUnassigned) counts(owner[j], j) += 1.0;
    }
  }
}

}  // namespace

MonteCarloEstimate monte_carlo_welfare_serial(const Rounder& r, const Matrix& values,
                                              std::uint64_t samples, std::uint64_t seed) {
  std::vector<Moments> blocks(kBlocks);
  for (std::int64_t b = 0; b < kBlocks; ++b) {
    blocks[b] = welfare_block(r, values, seed, block_begin(samples, b), block_begin(samples, b + 1));
  }
  return summarize(blocks, samples);
}

MonteCarloEstimate monte_carlo_welfare(const Rounder& r, const Matrix& values,
                                       std::uint64_t samples, std::uint64_t seed) {
  std::vector<Moments> blocks(kBlocks);
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t b = 0; b < kBlocks; ++b) {
    blocks[b] = welfare_block(r, values, seed, block_begin(samples, b), block_begin(samples, b + 1));
  }
  return summarize(blocks, samples);
}

Matrix assignment_counts_serial(const Rounder& r, std::uint64_t samples, std::uint64_t seed) {
  Matrix counts(r.bins(), r.items());
  count_block(r, seed, 0, samples, counts);
  return counts;
}

Matrix assignment_counts(const Rounder& r, std::uint64_t samples, std::uint64_t seed) {
  std::vector<Matrix> partial(kBlocks, Matrix(r.bins(), r.items()));
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t b = 0; b < kBlocks; ++b) {
    count_block(r, seed, block_begin(samples, b), block_begin(samples, b + 1), partial[b]);
  }
  // Counts are integers below 2^53, so the block order does not affect the result.
  Matrix counts(r.bins(), r.items());
  for (const auto& p : partial) {
    for (std::size_t k = 0; k < counts.size(); ++k) counts.flat()[k] += p.flat()[k];
  }
  return counts;
}

}  // namespace gapmech
