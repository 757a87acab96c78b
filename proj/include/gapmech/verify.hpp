#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "gapmech/instance.hpp"
#include "gapmech/io.hpp"
#include "gapmech/objective.hpp"

namespace gapmech {

enum class VerifyLevel { kQuick, kFull };

VerifyLevel parse_verify_level(const std::string& s);

using GradientFn =
    std::function<Matrix(const Matrix& values, const ItemPermutation&, const MarginalMatrix&)>;

struct VerifyOptions {
  VerifyLevel level = VerifyLevel::kQuick;
  std::uint64_t seed = 2024;
  /// Gradient under test; defaults to grad_F. Lets a mutated gradient be fed to the checks.
  GradientFn gradient;
  /// Monte Carlo sample count; 0 picks 1e5 (quick) or 1e6 (full).
  std::uint64_t samples = 0;
};

struct CheckResult {
  std::string name;
  bool passed = true;
  std::string detail;
  Json counterexample;  // null when passed
};

struct VerifyReport {
  std::vector<CheckResult> checks;

  bool passed() const;
  Json to_json() const;
};

VerifyReport verify_suite(const VerifyOptions& opts);

/// Random point of R: per bin, up to max_components random feasible sets with
/// random masses whose total is at most 1.
SparseFractionalAssignment random_fractional_assignment(const Instance& inst, std::uint64_t seed,
                                                        std::size_t max_components = 3);

/// Random marginal matrix with entries uniform on [0, 1].
MarginalMatrix random_marginals(std::size_t bins, std::size_t items, std::uint64_t seed);

}  // namespace gapmech
