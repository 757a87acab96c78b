#include "gapmech/mechanism.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include <omp.h>

#include "gapmech/io.hpp"
#include "gapmech/rng.hpp"

namespace gapmech {

std::string to_string(RoundingMode mode) {
  return mode == RoundingMode::kGreedy ? "greedy" : "simplified";
}

RoundingMode parse_rounding_mode(const std::string& s) {
  if (s == "greedy") return RoundingMode::kGreedy;
  if (s == "simplified") return RoundingMode::kSimplified;
  throw ValidationError("unknown rounding '" + s + "' (expected greedy|simplified)");
}

std::string to_string(Profile p) {
  switch (p) {
    case Profile::kUniform: return "uniform";
    case Profile::kCorrelated: return "correlated";
    case Profile::kKnapsackHard: return "knapsack-hard";
  }
  return "uniform";
}

Profile parse_profile(const std::string& s) {
  if (s == "uniform") return Profile::kUniform;
  if (s == "correlated") return Profile::kCorrelated;
  if (s == "knapsack-hard") return Profile::kKnapsackHard;
  throw ValidationError("unknown profile '" + s + "' (expected uniform|correlated|knapsack-hard)");
}

TraceSummary summarize(const SearchTrace& trace) {
  TraceSummary s;
  s.iterations = trace.iterations.size();
  s.steps = trace.steps;
  s.pool_size = trace.iterations.empty() ? 0 : trace.iterations.back().pool_size;
  s.hit_max_iters = trace.hit_max_iters;
  s.guarantee_void = trace.guarantee_void;
  return s;
}

namespace {

std::unique_ptr<Rounder> make_rounder(const SparseFractionalAssignment& x,
                                      const ItemPermutation& perm, RoundingMode mode) {
  if (mode == RoundingMode::kGreedy) return std::make_unique<GreedyRounder>(damp_assignment(x), perm);
  return std::make_unique<SimplifiedRounder>(x, perm);
}

}  // namespace

MechanismRun run_mechanism(const Instance& inst, const SearchConfig& cfg, std::uint64_t seed,
                           BidderModel bidders, RoundingMode rounding) {
  validate_instance(inst);
  MechanismRun run;
  run.instance_digest = instance_digest(inst);
  run.cfg = cfg;
  run.seed = seed;
  run.bidders = bidders;
  run.rounding = rounding;

  SearchResult solved = maximize_F(inst, cfg);
  const ItemPermutation perm = value_sorted_permutation(inst);
  run.y_star = solved.y;
  run.objective = solved.objective;
  run.x_components = solved.x.component_count();
  for (std::size_t i = 0; i < solved.x.bins(); ++i) run.x_bin_mass.push_back(solved.x.bin_mass(i));
  run.trace = summarize(solved.trace);

  const RoundingOutcome outcome = make_rounder(solved.x, perm, rounding)->sample(seed);
  run.allocation = outcome.allocation;
  run.welfare = allocation_welfare(inst, run.allocation);
  run.payments = bidders == BidderModel::kBins
                     ? payments_bin_bidders(inst, solved.y, outcome, cfg)
                     : payments_item_bidders(inst, solved.y, outcome, cfg);
  return run;
}

Instance generate_instance(std::size_t bins, std::size_t items, std::uint64_t seed,
                           Profile profile) {
  if (bins < 1 || items < 1) throw ValidationError("bins and items must be at least 1");
  Instance inst;
  inst.values = Matrix(bins, items);
  inst.weights = Matrix(bins, items);
  inst.capacities.assign(bins, 0.0);
  auto draw = [&](std::uint64_t field, std::size_t i, std::size_t j) {
    return counter_uniform(seed, Stream::kGenerate, field, i * items + j);
  };
  for (std::size_t i = 0; i < bins; ++i) {
    for (std::size_t j = 0; j < items; ++j) {
      const double w = 1.0 + 9.0 * draw(1, i, j);
      double v = 0.0;
      switch (profile) {
        case Profile::kUniform: v = 1.0 + 9.0 * draw(0, i, j); break;
        case Profile::kCorrelated: v = std::max(0.0, w + 2.0 * draw(0, i, j) - 1.0); break;
        case Profile::kKnapsackHard: v = w * (1.0 + 0.02 * (draw(0, i, j) - 0.5)); break;
      }
      inst.weights(i, j) = w;
      inst.values(i, j) = v;
      inst.capacities[i] += w;
    }
    inst.capacities[i] *= 0.5;
  }
  return inst;
}

WelfareEstimate estimate_welfare(const Instance& inst, const SearchConfig& cfg,
                                 std::uint64_t samples, std::uint64_t seed, RoundingMode rounding,
                                 std::uint64_t enumeration_cap) {
  validate_instance(inst);
  WelfareEstimate est;
  SearchResult solved = maximize_F(inst, cfg);
  const ItemPermutation perm = value_sorted_permutation(inst);
  est.objective = solved.objective;
  est.trace = summarize(solved.trace);
  const SparseFractionalAssignment damped = damp_assignment(solved.x);
  est.exact_expected = expected_welfare(inst.values, assignment_distribution(damped, perm));

  if (rounding == RoundingMode::kGreedy) {
    est.monte_carlo = monte_carlo_welfare(GreedyRounder(damped, perm), inst.values, samples, seed);
  } else {
    est.monte_carlo =
        monte_carlo_welfare(SimplifiedRounder(solved.x, perm), inst.values, samples, seed);
  }

  if (enumeration_size(inst.bins(), inst.items()) <= enumeration_cap) {
    est.opt = brute_force_opt_parallel(inst, enumeration_cap).value;
    if (*est.opt > 0.0) est.ratio = est.exact_expected / *est.opt;
  }
  return est;
}

namespace {

Instance with_report(const Instance& truth, BidderModel model, std::size_t bidder,
                     const std::vector<double>& report) {
  Instance out = truth;
  if (model == BidderModel::kBins) {
    for (std::size_t j = 0; j < truth.items(); ++j) out.values(bidder, j) = report[j];
  } else {
    for (std::size_t i = 0; i < truth.bins(); ++i) out.values(i, bidder) = report[i];
  }
  return out;
}

std::vector<double> truthful_entries(const Instance& truth, BidderModel model, std::size_t bidder) {
  std::vector<double> entries;
  if (model == BidderModel::kBins) {
    auto row = truth.values.row(bidder);
    entries.assign(row.begin(), row.end());
  } else {
    for (std::size_t i = 0; i < truth.bins(); ++i) entries.push_back(truth.values(i, bidder));
  }
  return entries;
}

std::vector<std::vector<double>> factor_grid(std::size_t entries, const std::vector<double>& grid) {
  std::vector<double> levels = {1.0};
  levels.insert(levels.end(), grid.begin(), grid.end());
  std::vector<std::vector<double>> out;
  const double product = std::pow(static_cast<double>(levels.size()), static_cast<double>(entries));
  if (product - 1.0 <= 4096.0) {
    std::vector<std::size_t> digit(entries, 0);
    for (;;) {
      std::size_t k = 0;
      while (k < entries && ++digit[k] == levels.size()) digit[k++] = 0;
      if (k == entries) break;
      std::vector<double> f(entries);
      for (std::size_t e = 0; e < entries; ++e) f[e] = levels[digit[e]];
      out.push_back(std::move(f));
    }
    return out;
  }
  for (double g : grid) {
    for (std::size_t e = 0; e < entries; ++e) {
      std::vector<double> f(entries, 1.0);
      f[e] = g;
      out.push_back(std::move(f));
    }
    out.emplace_back(entries, g);
  }
  return out;
}

}  // namespace

UtilityRow expected_utility(const Instance& truth, BidderModel model, std::size_t bidder,
                            const std::vector<double>& report, const SearchConfig& cfg,
                            double pivot) {
  const Instance reported = with_report(truth, model, bidder, report);
  const SearchResult solved = maximize_F(reported, cfg);
  const ItemPermutation perm = value_sorted_permutation(reported);
  const AssignmentDistribution dist = assignment_distribution(damp_assignment(solved.x), perm);

  double true_value = 0.0;
  double reported_value = 0.0;
  if (model == BidderModel::kBins) {
    for (std::size_t j = 0; j < truth.items(); ++j) {
      true_value += truth.values(bidder, j) * dist.q(bidder, j);
      reported_value += reported.values(bidder, j) * dist.q(bidder, j);
    }
  } else {
    for (std::size_t i = 0; i < truth.bins(); ++i) {
      true_value += truth.values(i, bidder) * dist.q(i, bidder);
      reported_value += reported.values(i, bidder) * dist.q(i, bidder);
    }
  }
  const BidderPayment frac = fractional_terms(reported, perm, solved.y, model, bidder, pivot);

  UtilityRow row;
  row.report = report;
  row.expected_value = true_value;
  // The realized payment is linear in the realized (reported) value.
  row.expected_payment =
      frac.frac_gain > 0.0 ? reported_value * (frac.frac_payment / frac.frac_gain) : 0.0;
  row.utility = row.expected_value - row.expected_payment;
  return row;
}

TruthAudit audit_truthfulness(const Instance& truth, const SearchConfig& cfg, BidderModel model,
                              std::size_t bidder, const std::vector<double>& grid, double slack) {
  validate_instance(truth);
  const std::size_t limit = model == BidderModel::kBins ? truth.bins() : truth.items();
  if (bidder >= limit) throw ValidationError("bidder index out of range");
  for (double g : grid) {
    if (!std::isfinite(g) || g < 0.0) throw ValidationError("grid factors must be finite and >= 0");
  }

  TruthAudit audit;
  audit.model = model;
  audit.bidder = bidder;
  audit.slack = slack;

  const double pivot = model == BidderModel::kBins ? clarke_pivot_bin(truth, bidder, cfg)
                                                   : clarke_pivot_item(truth, bidder, cfg);
  const std::vector<double> entries = truthful_entries(truth, model, bidder);
  audit.truthful = expected_utility(truth, model, bidder, entries, cfg, pivot);
  audit.truthful.factors.assign(entries.size(), 1.0);

  const auto factors = factor_grid(entries.size(), grid);
  audit.misreports.resize(factors.size());
  const auto count = static_cast<std::int64_t>(factors.size());
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t k = 0; k < count; ++k) {
    std::vector<double> report(entries.size());
    for (std::size_t e = 0; e < entries.size(); ++e) report[e] = entries[e] * factors[k][e];
    UtilityRow row = expected_utility(truth, model, bidder, report, cfg, pivot);
    row.factors = factors[k];
    audit.misreports[k] = std::move(row);
  }

  for (const auto& row : audit.misreports) {
    if (audit.truthful.utility + 1e-12 < (1.0 - slack) * row.utility) {
      ++audit.violations;
    } else if (audit.truthful.utility < row.utility) {
      ++audit.within_slack;
    }
  }
  return audit;
}

}  // namespace gapmech
