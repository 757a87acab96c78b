#include "gapmech/payments.hpp"

#include <algorithm>

#include <cstdint>
#include <stdexcept>

#include <omp.h>

namespace gapmech {

std::string to_string(BidderModel model) {
  return model == BidderModel::kBins ? "bins" : "items";
}

BidderModel parse_bidder_model(const std::string& s) {
  if (s == "bins") return BidderModel::kBins;
  if (s == "items") return BidderModel::kItems;
  throw ValidationError("unknown bidder model '" + s + "' (expected bins|items)");
}

std::size_t PaymentReport::clamp_count() const {
  std::size_t k = 0;
  for (const auto& b : bidders) k += b.clamped ? 1 : 0;
  return k;
}

Instance without_bin_bidder(const Instance& inst, std::size_t bin) {
  Instance out = inst;
  for (double& v : out.values.row(bin)) v = 0.0;
  return out;
}

Instance without_item_bidder(const Instance& inst, std::size_t item) {
  Instance out = inst;
  for (std::size_t i = 0; i < out.bins(); ++i) out.values(i, item) = 0.0;
  return out;
}

double value_without_bin_bidder(const Instance& inst, const ItemPermutation& perm,
                                const MarginalMatrix& y_star, std::size_t bin) {
  return eval_F(without_bin_bidder(inst, bin).values, perm, y_star);
}

double value_without_item_bidder(const Instance& inst, const ItemPermutation& perm,
                                 const MarginalMatrix& y_star, std::size_t item) {
  double total = 0.0;
  for (std::size_t j = 0; j < inst.items(); ++j) {
    if (j != item) total += item_objective(inst.values, perm, y_star, j);
  }
  return total;
}

double clarke_pivot_bin(const Instance& inst, std::size_t bin, const SearchConfig& cfg) {
  return maximize_F(without_bin_bidder(inst, bin), cfg).objective;
}

double clarke_pivot_item(const Instance& inst, std::size_t item, const SearchConfig& cfg) {
  return maximize_F(without_item_bidder(inst, item), cfg).objective;
}

std::vector<double> clarke_pivots(const Instance& inst, BidderModel model, const SearchConfig& cfg) {
  const std::size_t count = model == BidderModel::kBins ? inst.bins() : inst.items();
  std::vector<double> pivots(count);
  const auto total = static_cast<std::int64_t>(count);
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t b = 0; b < total; ++b) {
    const auto k = static_cast<std::size_t>(b);
    pivots[k] = model == BidderModel::kBins ? clarke_pivot_bin(inst, k, cfg)
                                            : clarke_pivot_item(inst, k, cfg);
  }
  return pivots;
}

BidderPayment fractional_terms(const Instance& inst, const ItemPermutation& perm,
                               const MarginalMatrix& y_star, BidderModel model, std::size_t bidder,
                               double pivot) {
  const double total = eval_F(inst, perm, y_star);
  BidderPayment b;
  b.bidder = bidder;
  b.pivot = pivot;
  b.others_value = model == BidderModel::kBins
                       ? value_without_bin_bidder(inst, perm, y_star, bidder)
                       : value_without_item_bidder(inst, perm, y_star, bidder);
  b.frac_gain = total - b.others_value;
  b.raw_frac_payment = pivot - b.others_value;
  // An exact solver gives 0 <= h - F_{-b} <= F - F_{-b}; the approximate one may
  // miss by its tolerance, which is clamped and flagged.
  const double upper = std::max(0.0, b.frac_gain);
  b.frac_payment = std::clamp(b.raw_frac_payment, 0.0, upper);
  b.clamped = b.frac_payment != b.raw_frac_payment;
  return b;
}

void realize_payment(BidderPayment& b, double realized_value) {
  b.realized_value = realized_value;
  b.payment = b.frac_gain > 0.0 ? realized_value * (b.frac_payment / b.frac_gain) : 0.0;
}

PaymentReport assemble_payments(const Instance& inst, const MarginalMatrix& y_star,
                                const Allocation& allocation, BidderModel model,
                                const std::vector<double>& pivots) {
  const ItemPermutation perm = value_sorted_permutation(inst);
  PaymentReport report;
  report.model = model;
  report.objective = eval_F(inst, perm, y_star);

  std::vector<std::size_t> owner(inst.items(), kUnassigned);
  for (std::size_t i = 0; i < allocation.sets.size(); ++i) {
    for (std::size_t j : allocation.sets[i]) owner[j] = i;
  }

  for (std::size_t b = 0; b < pivots.size(); ++b) {
    BidderPayment bp = fractional_terms(inst, perm, y_star, model, b, pivots[b]);
    double realized = 0.0;
    if (model == BidderModel::kBins) {
      realized = bin_value(inst, b, allocation.sets[b]);
    } else if (owner[b] != kUnassigned) {
      realized = inst.values(owner[b], b);
    }
    realize_payment(bp, realized);
    report.bidders.push_back(bp);
  }
  return report;
}

PaymentReport payments_bin_bidders(const Instance& inst, const MarginalMatrix& y_star,
                                   const RoundingOutcome& outcome, const SearchConfig& cfg) {
  return assemble_payments(inst, y_star, outcome.allocation, BidderModel::kBins,
                           clarke_pivots(inst, BidderModel::kBins, cfg));
}

PaymentReport payments_item_bidders(const Instance& inst, const MarginalMatrix& y_star,
                                    const RoundingOutcome& outcome, const SearchConfig& cfg) {
  return assemble_payments(inst, y_star, outcome.allocation, BidderModel::kItems,
                           clarke_pivots(inst, BidderModel::kItems, cfg));
}

}  // namespace gapmech
