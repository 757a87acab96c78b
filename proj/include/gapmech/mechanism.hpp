#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gapmech/instance.hpp"
#include "gapmech/local_search.hpp"
#include "gapmech/payments.hpp"
#include "gapmech/rounding.hpp"

namespace gapmech {

enum class RoundingMode { kGreedy, kSimplified };

std::string to_string(RoundingMode mode);
RoundingMode parse_rounding_mode(const std::string& s);

struct TraceSummary {
  std::size_t iterations = 0;
  std::uint64_t steps = 0;
  std::size_t pool_size = 0;
  bool hit_max_iters = false;
  bool guarantee_void = false;
};

TraceSummary summarize(const SearchTrace& trace);

/// Everything one end-to-end run (solve, round, pay) produced.
struct MechanismRun {
  std::string instance_digest;
  SearchConfig cfg;
  std::uint64_t seed = 0;
  BidderModel bidders = BidderModel::kBins;
  RoundingMode rounding = RoundingMode::kGreedy;
  MarginalMatrix y_star;
  double objective = 0.0;
  std::size_t x_components = 0;
  std::vector<double> x_bin_mass;
  Allocation allocation;
  double welfare = 0.0;
  PaymentReport payments;
  TraceSummary trace;
};

/// Deterministic in (inst, cfg, seed, bidders, rounding).
MechanismRun run_mechanism(const Instance& inst, const SearchConfig& cfg, std::uint64_t seed,
                           BidderModel bidders, RoundingMode rounding);

enum class Profile { kUniform, kCorrelated, kKnapsackHard };

std::string to_string(Profile p);
Profile parse_profile(const std::string& s);

/// Reproducible random instance. Weights are uniform on [1, 10] and each capacity is
/// half the bin's total weight. Values: uniform on [1, 10] (uniform), weight plus
/// uniform noise on [-1, 1] floored at 0 (correlated), or weight times 1 +/- 1%
/// (knapsack-hard).
Instance generate_instance(std::size_t bins, std::size_t items, std::uint64_t seed,
                           Profile profile);

struct WelfareEstimate {
  double objective = 0.0;       // F(y*)
  double exact_expected = 0.0;  // closed-form expectation of the greedy rounding
  MonteCarloEstimate monte_carlo;
  std::optional<double> opt;    // brute-force optimum when within the cap
  std::optional<double> ratio;  // exact_expected / opt
  TraceSummary trace;
};

WelfareEstimate estimate_welfare(const Instance& inst, const SearchConfig& cfg,
                                 std::uint64_t samples, std::uint64_t seed, RoundingMode rounding,
                                 std::uint64_t enumeration_cap = kDefaultEnumerationCap);

/// One bidder's exact expected outcome over the rounding's coins.
struct UtilityRow {
  std::vector<double> factors;  // per value entry multiplier applied to the truthful report
  std::vector<double> report;
  double expected_value = 0.0;  // under the true values
  double expected_payment = 0.0;
  double utility = 0.0;
};

/// Reported values of `bidder` are `report`; everything else is truthful.
/// pivot is the bidder's Clarke pivot, which does not depend on its own report.
UtilityRow expected_utility(const Instance& truth, BidderModel model, std::size_t bidder,
                            const std::vector<double>& report, const SearchConfig& cfg,
                            double pivot);

struct TruthAudit {
  BidderModel model = BidderModel::kBins;
  std::size_t bidder = 0;
  double slack = 0.05;
  UtilityRow truthful;
  std::vector<UtilityRow> misreports;
  std::size_t violations = 0;         // truthful < (1 - slack) * misreport
  std::size_t within_slack = 0;       // misreport better, but inside the slack

  bool passed() const { return violations == 0; }
};

/// Misreports scale each of the bidder's value entries by a factor from {1} u grid.
/// The full product is used when it has at most 4096 members, otherwise single-entry
/// and uniform scalings. Misreports are evaluated concurrently.
TruthAudit audit_truthfulness(const Instance& truth, const SearchConfig& cfg, BidderModel model,
                              std::size_t bidder, const std::vector<double>& grid,
                              double slack = 0.05);

inline const std::vector<double> kDefaultGrid = {0.5, 0.75, 0.9, 1.1, 1.25, 1.5, 2.0};

}  // namespace gapmech
