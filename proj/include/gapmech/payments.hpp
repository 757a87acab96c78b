#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "gapmech/instance.hpp"
#include "gapmech/local_search.hpp"
#include "gapmech/objective.hpp"
#include "gapmech/rounding.hpp"

namespace gapmech {

/// Who holds the private values: one bidder per bin (a row of v) or per item (a column).
enum class BidderModel { kBins, kItems };

std::string to_string(BidderModel model);
BidderModel parse_bidder_model(const std::string& s);

struct BidderPayment {
  std::size_t bidder = 0;
  double pivot = 0.0;           // h: best F without this bidder
  double others_value = 0.0;    // F_{-b}(y*), original bin orders
  double raw_frac_payment = 0.0;  // h - F_{-b}(y*), before clamping
  double frac_payment = 0.0;    // clamped into [0, frac_gain]
  double frac_gain = 0.0;       // F(y*) - F_{-b}(y*)
  double realized_value = 0.0;  // g_b of the rounded outcome
  double payment = 0.0;
  bool clamped = false;
};

struct PaymentReport {
  BidderModel model = BidderModel::kBins;
  double objective = 0.0;  // F(y*)
  std::vector<BidderPayment> bidders;

  std::size_t clamp_count() const;
};

/// F(y*) with row `bin` of v set to zero while perm and y* stay as they are.
/// Terms can be negative (a zeroed bin may still lead an item's order).
double value_without_bin_bidder(const Instance& inst, const ItemPermutation& perm,
                                const MarginalMatrix& y_star, std::size_t bin);

/// F(y*) with item j's inner sum dropped.
double value_without_item_bidder(const Instance& inst, const ItemPermutation& perm,
                                 const MarginalMatrix& y_star, std::size_t item);

Instance without_bin_bidder(const Instance& inst, std::size_t bin);
Instance without_item_bidder(const Instance& inst, std::size_t item);

/// Re-solves the market with the bidder's values zeroed (fresh bin orders) and returns F.
double clarke_pivot_bin(const Instance& inst, std::size_t bin, const SearchConfig& cfg);
double clarke_pivot_item(const Instance& inst, std::size_t item, const SearchConfig& cfg);

/// All pivots of a model; the re-solves run concurrently.
std::vector<double> clarke_pivots(const Instance& inst, BidderModel model, const SearchConfig& cfg);

/// Fractional VCG quantities for one bidder given its pivot; realized fields left zero.
BidderPayment fractional_terms(const Instance& inst, const ItemPermutation& perm,
                               const MarginalMatrix& y_star, BidderModel model, std::size_t bidder,
                               double pivot);

/// p = g * p_frac / w_frac (or 0 when w_frac = 0).
void realize_payment(BidderPayment& b, double realized_value);

PaymentReport payments_bin_bidders(const Instance& inst, const MarginalMatrix& y_star,
                                   const RoundingOutcome& outcome, const SearchConfig& cfg);
PaymentReport payments_item_bidders(const Instance& inst, const MarginalMatrix& y_star,
                                    const RoundingOutcome& outcome, const SearchConfig& cfg);

/// Assembles a report from precomputed pivots (one per bidder).
PaymentReport assemble_payments(const Instance& inst, const MarginalMatrix& y_star,
                                const Allocation& allocation, BidderModel model,
                                const std::vector<double>& pivots);

}  // namespace gapmech
