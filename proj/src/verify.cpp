#include "gapmech/verify.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "gapmech/knapsack.hpp"
#include "gapmech/local_search.hpp"
#include "gapmech/mechanism.hpp"
#include "gapmech/payments.hpp"
#include "gapmech/rng.hpp"
#include "gapmech/rounding.hpp"

namespace gapmech {

VerifyLevel parse_verify_level(const std::string& s) {
  if (s == "quick") return VerifyLevel::kQuick;
  if (s == "full") return VerifyLevel::kFull;
  throw ValidationError("unknown verify level '" + s + "' (expected quick|full)");
}

bool VerifyReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

Json VerifyReport::to_json() const {
  Json arr = Json::array();
  for (const auto& c : checks) {
    arr.push_back(Json{{"name", c.name},
                       {"passed", c.passed},
                       {"detail", c.detail},
                       {"counterexample", c.counterexample}});
  }
  return Json{{"passed", passed()}, {"checks", arr}};
}

SparseFractionalAssignment random_fractional_assignment(const Instance& inst, std::uint64_t seed,
                                                        std::size_t max_components) {
  SplitMix rng(seed);
  SparseFractionalAssignment x(inst.bins(), inst.items());
  for (std::size_t i = 0; i < inst.bins(); ++i) {
    const std::size_t k = 1 + rng.below(max_components);
    std::vector<ItemSet> sets;
    for (std::size_t t = 0; t < k; ++t) {
      ItemSet s;
      for (std::size_t j = 0; j < inst.items(); ++j) {
        if (rng.uniform() < 0.5) s.push_back(j);
      }
      // Drop items until the set fits.
      while (!s.empty() && !is_feasible_set(inst, i, s)) s.erase(s.begin() + rng.below(s.size()));
      if (!s.empty()) sets.push_back(std::move(s));
    }
    std::vector<double> w(sets.size());
    double total = 0.0;
    for (double& v : w) total += (v = rng.uniform(0.05, 1.0));
    const double budget = rng.uniform(0.3, 1.0);
    for (std::size_t t = 0; t < sets.size(); ++t) x.add(i, sets[t], budget * w[t] / total);
  }
  return x;
}

MarginalMatrix random_marginals(std::size_t bins, std::size_t items, std::uint64_t seed) {
  SplitMix rng(seed);
  MarginalMatrix y(bins, items);
  for (double& v : y.flat()) v = rng.uniform();
  return y;
}

namespace {

struct Checker {
  CheckResult result;

  explicit Checker(std::string name) { result.name = std::move(name); }

  void fail(const std::string& why, Json example) {
    if (result.passed) {
      result.passed = false;
      result.detail = why;
      result.counterexample = std::move(example);
    }
  }
};

// z threshold that keeps the family-wise false-alarm rate of `tests` two-sided
// comparisons at the single-test rate of a 3-sigma cut.
double family_z(std::size_t tests) {
  const double alpha = std::erfc(3.0 / std::sqrt(2.0)) / static_cast<double>(std::max<std::size_t>(tests, 1));
  double lo = 0.0, hi = 20.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (std::erfc(mid / std::sqrt(2.0)) > alpha ? lo : hi) = mid;
  }
  return hi;
}

Json point_json(const Instance& inst, const MarginalMatrix& y) {
  return Json{{"instance", to_json(inst)}, {"y", to_json(y)}};
}

Json x_json(const SparseFractionalAssignment& x) {
  Json bins = Json::array();
  for (std::size_t i = 0; i < x.bins(); ++i) {
    Json comps = Json::array();
    for (const auto& c : x.components(i)) comps.push_back(Json{{"set", c.items}, {"mass", c.mass}});
    bins.push_back(comps);
  }
  return bins;
}

CheckResult check_gradient_fd(const VerifyOptions& o, std::size_t probes) {
  Checker c("objective.gradient_vs_finite_differences");
  const double h = 1e-6;
  double worst = 0.0;
  for (std::size_t p = 0; p < probes && c.result.passed; ++p) {
    const Instance inst = generate_instance(3, 4, o.seed + p, Profile::kUniform);
    const ItemPermutation perm = value_sorted_permutation(inst);
    MarginalMatrix y = random_marginals(3, 4, o.seed * 7 + p);
    const Matrix g = o.gradient(inst.values, perm, y);
    for (std::size_t i = 0; i < 3; ++i) {
      for (std::size_t j = 0; j < 4; ++j) {
        MarginalMatrix up = y, dn = y;
        up(i, j) += h;
        dn(i, j) -= h;
        const double fd = (eval_F(inst, perm, up) - eval_F(inst, perm, dn)) / (2 * h);
        const double rel = std::abs(g(i, j) - fd) / std::max(std::abs(fd), 1e-12);
        worst = std::max(worst, rel);
        if (rel > 1e-4) {
          c.fail("relative error " + std::to_string(rel) + " at (" + std::to_string(i) + "," +
                     std::to_string(j) + ")",
                 point_json(inst, y));
        }
      }
    }
  }
  if (c.result.passed) c.result.detail = "max relative error " + std::to_string(worst);
  return c.result;
}

CheckResult check_concavity(const VerifyOptions& o, std::size_t probes) {
  Checker c("objective.concavity");
  SplitMix rng(o.seed ^ 0xc0c0);
  for (std::size_t p = 0; p < probes && c.result.passed; ++p) {
    const Instance inst = generate_instance(3, 4, o.seed + 100 + p % 10, Profile::kUniform);
    const ItemPermutation perm = value_sorted_permutation(inst);
    const MarginalMatrix a = random_marginals(3, 4, rng.next());
    const MarginalMatrix b = random_marginals(3, 4, rng.next());
    const double lam = rng.uniform();
    MarginalMatrix mix(3, 4);
    for (std::size_t k = 0; k < mix.size(); ++k) {
      mix.flat()[k] = lam * a.flat()[k] + (1 - lam) * b.flat()[k];
    }
    const double lhs = eval_F(inst, perm, mix);
    const double rhs = lam * eval_F(inst, perm, a) + (1 - lam) * eval_F(inst, perm, b);
    if (lhs < rhs - 1e-9) c.fail("F(mix) below chord by " + std::to_string(rhs - lhs), point_json(inst, mix));
  }
  return c.result;
}

CheckResult check_gradient_shift(const VerifyOptions& o, std::size_t probes) {
  Checker c("objective.gradient_shift_bounds");
  SplitMix rng(o.seed ^ 0x5151);
  for (std::size_t p = 0; p < probes && c.result.passed; ++p) {
    const Instance inst = generate_instance(3, 4, o.seed + 200 + p % 10, Profile::kUniform);
    const ItemPermutation perm = value_sorted_permutation(inst);
    const MarginalMatrix y = random_marginals(3, 4, rng.next());
    const double delta = rng.uniform(0.0, 0.1);
    MarginalMatrix y2 = y;
    for (double& v : y2.flat()) v = std::clamp(v + rng.uniform(-delta, delta), 0.0, 1.0);
    const Matrix g = o.gradient(inst.values, perm, y);
    const Matrix g2 = o.gradient(inst.values, perm, y2);
    const double lo = std::exp(-3 * delta);
    const double hi = std::exp(3 * delta);
    for (std::size_t k = 0; k < g.size(); ++k) {
      if (g2.flat()[k] < lo * g.flat()[k] - 1e-9 || g2.flat()[k] > hi * g.flat()[k] + 1e-9) {
        c.fail("gradient entry left its shift band", point_json(inst, y));
        break;
      }
    }
  }
  return c.result;
}

CheckResult check_gradient_range(const VerifyOptions& o, std::size_t probes) {
  Checker c("objective.monotone_and_gradient_range");
  SplitMix rng(o.seed ^ 0x7777);
  for (std::size_t p = 0; p < probes && c.result.passed; ++p) {
    const Instance inst = generate_instance(3, 4, o.seed + 300 + p % 10, Profile::kCorrelated);
    const ItemPermutation perm = value_sorted_permutation(inst);
    const MarginalMatrix y = random_marginals(3, 4, rng.next());
    MarginalMatrix up = y;
    for (double& v : up.flat()) v = std::min(1.0, v + rng.uniform(0.0, 0.3));
    if (eval_F(inst, perm, up) < eval_F(inst, perm, y)) c.fail("F decreased along y <= y'", point_json(inst, y));
    const Matrix g = o.gradient(inst.values, perm, y);
    const double M = inst.max_value();
    for (double v : g.flat()) {
      if (v < 0.0 || v > M + 1e-12) {
        c.fail("gradient entry " + std::to_string(v) + " outside [0, M]", point_json(inst, y));
        break;
      }
    }
  }
  return c.result;
}

CheckResult check_knapsack(const VerifyOptions& o, std::size_t problems, std::size_t max_items) {
  Checker c("knapsack.fptas_guarantee");
  SplitMix rng(o.seed ^ 0x4b4b);
  for (std::size_t p = 0; p < problems && c.result.passed; ++p) {
    KnapsackProblem kp;
    const std::size_t k = 1 + rng.below(max_items);
    double total = 0.0;
    for (std::size_t t = 0; t < k; ++t) {
      kp.profits.push_back(rng.uniform(0.0, 10.0));
      kp.weights.push_back(rng.uniform(0.5, 10.0));
      total += kp.weights.back();
    }
    kp.capacity = total * rng.uniform(0.1, 0.7);
    const double exact = knapsack_exact(kp).value;
    for (double eps : {0.5, 0.1, 0.01}) {
      const ItemSet s = knapsack_fptas(kp, eps);
      if (!knapsack_feasible(kp, s) || knapsack_profit(kp, s) < (1 - eps) * exact) {
        c.fail("FPTAS contract broken at eps " + std::to_string(eps),
               Json{{"profits", kp.profits}, {"weights", kp.weights}, {"capacity", kp.capacity}});
      }
    }
  }
  return c.result;
}

CheckResult check_local_search(const VerifyOptions& o, std::size_t runs, double eps) {
  Checker c("local_search.mechanics_and_ratio");
  for (std::size_t r = 0; r < runs && c.result.passed; ++r) {
    const std::size_t n = 1 + r % 3;
    const std::size_t m = 1 + (r / 3) % 4;
    const Instance inst = generate_instance(n, m, o.seed + 400 + r, Profile::kUniform);
    const SearchConfig cfg = SearchConfig::make(std::min(eps, 0.5), n, m);
    bool identity_ok = true;
    bool feasible_z = true;
    const SearchResult res = maximize_F(inst, cfg, [&](const SearchSnapshot& s) {
      const Matrix recomputed = s.pool.scaled_sum(s.delta);
      for (std::size_t k = 0; k < recomputed.size(); ++k) {
        if (std::abs(recomputed.flat()[k] - s.y.flat()[k]) > 1e-9) identity_ok = false;
      }
      for (std::size_t i = 0; i < n; ++i) {
        ItemSet set;
        for (std::size_t j = 0; j < m; ++j) {
          if (s.chosen[i * m + j]) set.push_back(j);
        }
        if (!is_feasible_set(inst, i, set)) feasible_z = false;
      }
    });
    const Json ex = Json{{"instance", to_json(inst)}, {"eps", cfg.eps}};
    if (!identity_ok) c.fail("y != delta * sum(Z)", ex);
    if (!feasible_z) c.fail("infeasible indicator added to Z", ex);
    if (!certify_membership(inst, res.x).ok()) c.fail("x not in R", ex);
    const double M = res.trace.scale;
    const double nn = static_cast<double>(n), mm = static_cast<double>(m);
    const double min_gain = cfg.eps * cfg.eps * M / (12 * mm * nn * nn);
    const auto& it = res.trace.iterations;
    for (std::size_t t = 0; t + 1 < it.size(); ++t) {
      if (it[t + 1].objective - it[t].objective < min_gain - 1e-9) {
        c.fail("iteration " + std::to_string(t) + " gained less than the per-step bound", ex);
        break;
      }
    }
    if (static_cast<double>(res.trace.steps) > 12 * mm * mm * nn * nn / (cfg.eps * cfg.eps)) {
      c.fail("iteration bound exceeded", ex);
    }
    const double opt = brute_force_opt(inst).value;
    const double floor_value =
        (1 - cfg.eps) * (1 - 1 / std::exp(1.0)) * opt - cfg.eps / (1 - cfg.eps) * M;
    if (res.objective < floor_value - 1e-9) c.fail("F(y) below the local-search guarantee", ex);
  }
  return c.result;
}

CheckResult check_dominate(const VerifyOptions& o, std::size_t probes) {
  Checker c("rounding.dominated_point_exactness");
  SplitMix rng(o.seed ^ 0xd0d0);
  for (std::size_t p = 0; p < probes && c.result.passed; ++p) {
    const std::size_t n = 1 + rng.below(3), m = 1 + rng.below(4);
    const Instance inst = generate_instance(n, m, rng.next(), Profile::kUniform);
    const SparseFractionalAssignment x = random_fractional_assignment(inst, rng.next(), 4);
    MarginalMatrix target = phi(x);
    for (double& v : target.flat()) v *= rng.uniform() < 0.2 ? 1.0 : rng.uniform();
    const SparseFractionalAssignment out = dominate_to_target(x, target);
    const MarginalMatrix got = phi(out);
    for (std::size_t k = 0; k < got.size(); ++k) {
      if (std::abs(got.flat()[k] - target.flat()[k]) > 1e-9) {
        c.fail("phi(x') != target", Json{{"x", x_json(x)}, {"target", to_json(target)}});
        break;
      }
    }
    if (out.component_count() > x.component_count() + n * m) {
      c.fail("component growth above n*m", Json{{"x", x_json(x)}});
    }
  }
  return c.result;
}

CheckResult check_expectation(const VerifyOptions& o, std::size_t probes, std::size_t mc_probes,
                              std::uint64_t samples) {
  Checker c("rounding.expected_welfare_equals_F");
  SplitMix rng(o.seed ^ 0xe0e0);
  for (std::size_t p = 0; p < probes && c.result.passed; ++p) {
    const std::size_t n = p % 2 ? 3 : 2, m = p % 2 ? 4 : 3;
    const Instance inst = generate_instance(n, m, rng.next(), Profile::kUniform);
    const ItemPermutation perm = value_sorted_permutation(inst);
    const SparseFractionalAssignment x = random_fractional_assignment(inst, rng.next());
    const SparseFractionalAssignment damped = damp_assignment(x);
    const double exact = expected_welfare(inst.values, assignment_distribution(damped, perm));
    const double f = eval_F(inst, perm, phi(x));
    const Json ex{{"instance", to_json(inst)}, {"x", x_json(x)}};
    if (std::abs(exact - f) > 1e-9) c.fail("closed form differs from F by " + std::to_string(exact - f), ex);
    if (p < mc_probes) {
      const auto est = monte_carlo_welfare(GreedyRounder(damped, perm), inst.values, samples, rng.next());
      if (std::abs(est.mean - f) > family_z(mc_probes) * est.stderr_) {
        c.fail("Monte Carlo mean outside the family-wise band", ex);
      }
    }
  }
  return c.result;
}

CheckResult check_permutation_dominance(const VerifyOptions& o, std::size_t probes) {
  Checker c("rounding.value_order_dominates");
  SplitMix rng(o.seed ^ 0xabab);
  for (std::size_t p = 0; p < probes && c.result.passed; ++p) {
    const std::size_t n = 2 + rng.below(2), m = 1 + rng.below(4);
    const Instance inst = generate_instance(n, m, rng.next(), Profile::kUniform);
    const ItemPermutation sigma = value_sorted_permutation(inst);
    ItemPermutation pi = sigma;
    while (pi.order == sigma.order) {
      for (auto& row : pi.order) {
        for (std::size_t k = row.size(); k > 1; --k) std::swap(row[k - 1], row[rng.below(k)]);
      }
    }
    const SparseFractionalAssignment damped =
        damp_assignment(random_fractional_assignment(inst, rng.next()));
    const double ws = expected_welfare(inst.values, assignment_distribution(damped, sigma));
    const double wp = expected_welfare(inst.values, assignment_distribution(damped, pi));
    if (ws < wp - 1e-12) c.fail("another order beat the value order", Json{{"instance", to_json(inst)}});
  }
  return c.result;
}

CheckResult check_rounding_laws(const VerifyOptions& o, std::size_t instances, std::uint64_t samples) {
  Checker c("rounding.greedy_matches_simplified");
  SplitMix rng(o.seed ^ 0x1717);
  for (std::size_t p = 0; p < instances && c.result.passed; ++p) {
    const Instance inst = generate_instance(3, 3, rng.next(), Profile::kUniform);
    const ItemPermutation perm = value_sorted_permutation(inst);
    const SparseFractionalAssignment x = random_fractional_assignment(inst, rng.next());
    const Matrix a = assignment_counts(GreedyRounder(damp_assignment(x), perm), samples, rng.next());
    const Matrix b = assignment_counts(SimplifiedRounder(x, perm), samples, rng.next());
    const double ns = static_cast<double>(samples);
    for (std::size_t k = 0; k < a.size(); ++k) {
      const double pa = a.flat()[k] / ns, pb = b.flat()[k] / ns;
      const double se = std::sqrt((pa * (1 - pa) + pb * (1 - pb)) / ns);
      if (std::abs(pa - pb) > family_z(instances * a.size()) * se) {
        c.fail("frequency gap beyond the family-wise band", Json{{"instance", to_json(inst)}, {"x", x_json(x)}});
        break;
      }
    }
  }
  return c.result;
}

CheckResult check_payments(const VerifyOptions& o, std::size_t runs, double eps) {
  Checker c("payments.ir_nonnegativity_and_expected_gain");
  for (std::size_t r = 0; r < runs && c.result.passed; ++r) {
    const std::size_t n = 2 + r % 2, m = 2 + r % 3;
    const Instance inst = generate_instance(n, m, o.seed + 500 + r, Profile::kUniform);
    const SearchConfig cfg = SearchConfig::make(eps, n, m);
    for (BidderModel model : {BidderModel::kBins, BidderModel::kItems}) {
      const MechanismRun run = run_mechanism(inst, cfg, o.seed + r, model, RoundingMode::kGreedy);
      const Json ex{{"instance", to_json(inst)}, {"model", to_string(model)}};
      for (const auto& b : run.payments.bidders) {
        if (b.payment < 0.0 || b.payment > b.realized_value + 1e-12) c.fail("payment outside [0, value]", ex);
        if (b.frac_gain == 0.0 && b.payment != 0.0) c.fail("zero-gain bidder pays", ex);
      }
      // w_frac must equal the bidder's exact expected realized value.
      const ItemPermutation perm = value_sorted_permutation(inst);
      const SearchResult solved = maximize_F(inst, cfg);
      const AssignmentDistribution dist = assignment_distribution(damp_assignment(solved.x), perm);
      for (std::size_t b = 0; b < run.payments.bidders.size(); ++b) {
        double expect = 0.0;
        if (model == BidderModel::kBins) {
          for (std::size_t j = 0; j < m; ++j) expect += inst.values(b, j) * dist.q(b, j);
        } else {
          for (std::size_t i = 0; i < n; ++i) expect += inst.values(i, b) * dist.q(i, b);
        }
        if (std::abs(expect - run.payments.bidders[b].frac_gain) > 1e-6) {
          c.fail("w_frac differs from expected realized value", ex);
        }
      }
    }
  }
  return c.result;
}

CheckResult check_worked_example() {
  Checker c("payments.two_bidder_example");
  Instance inst;
  inst.values = Matrix(2, 2);
  inst.values(0, 0) = 8;
  inst.values(0, 1) = 5;
  inst.values(1, 0) = 4;
  inst.values(1, 1) = 10;
  inst.weights = Matrix(2, 2, 1.0);
  inst.capacities = {2, 2};
  MarginalMatrix y(2, 2);
  y(0, 0) = 0.6;
  y(0, 1) = 0.3;
  y(1, 0) = 0.4;
  y(1, 1) = 0.7;
  const ItemPermutation perm = value_sorted_permutation(inst);
  const double f = eval_F(inst, perm, y);
  const double fm = value_without_bin_bidder(inst, perm, y, 0);
  const double f_expr = 4 * (1 - std::exp(-0.6)) + 4 * (1 - std::exp(-1.0)) +
                        5 * (1 - std::exp(-0.7)) + 5 * (1 - std::exp(-1.0));
  const double fm_expr = -4 * (1 - std::exp(-0.6)) + 4 * (1 - std::exp(-1.0)) + 10 * (1 - std::exp(-0.7));
  if (std::abs(f - f_expr) > 1e-9 || std::abs(fm - fm_expr) > 1e-9) {
    c.fail("F or F_{-1} deviates from the worked expressions", Json{{"F", f}, {"F_minus", fm}});
  } else {
    std::ostringstream s;
    s << "F=" << f << " F_minus_1=" << fm;
    c.result.detail = s.str();
  }
  return c.result;
}

CheckResult check_truthfulness(const VerifyOptions& o, std::size_t instances, double eps) {
  Checker c("payments.truthfulness_grid");
  std::size_t within = 0;
  for (std::size_t r = 0; r < instances && c.result.passed; ++r) {
    const Instance inst = generate_instance(2, 2, o.seed + 600 + r, Profile::kUniform);
    const SearchConfig cfg = SearchConfig::make(eps, 2, 2);
    for (BidderModel model : {BidderModel::kBins, BidderModel::kItems}) {
      for (std::size_t b = 0; b < 2; ++b) {
        const TruthAudit audit = audit_truthfulness(inst, cfg, model, b, kDefaultGrid, 0.05);
        within += audit.within_slack;
        if (!audit.passed()) c.fail("misreport beats truth beyond slack", to_json(audit));
      }
    }
  }
  if (c.result.passed) c.result.detail = std::to_string(within) + " misreports within slack";
  return c.result;
}

CheckResult check_brute_force(const VerifyOptions& o, std::size_t instances) {
  Checker c("gap_core.brute_force_optimality");
  SplitMix rng(o.seed ^ 0xbfbf);
  for (std::size_t r = 0; r < instances && c.result.passed; ++r) {
    const std::size_t n = 1 + rng.below(3), m = 1 + rng.below(5);
    const Instance inst = generate_instance(n, m, rng.next(), Profile::kCorrelated);
    const BruteForceResult best = brute_force_opt(inst);
    const BruteForceResult par = brute_force_opt_parallel(inst);
    if (best.value != par.value || !(best.allocation == par.allocation)) {
      c.fail("parallel enumeration disagrees with serial", to_json(inst));
    }
    if (!is_feasible_allocation(inst, best.allocation)) c.fail("optimum infeasible", to_json(inst));
    for (int s = 0; s < 200; ++s) {
      const Allocation a = decode_item_map(rng.below(enumeration_size(n, m)), n, m);
      if (is_feasible_allocation(inst, a) && allocation_welfare(inst, a) > best.value + 1e-9) {
        c.fail("sampled allocation beats the optimum", to_json(inst));
        break;
      }
    }
  }
  return c.result;
}

}  // namespace

VerifyReport verify_suite(const VerifyOptions& opts) {
  VerifyOptions o = opts;
  if (!o.gradient) {
    o.gradient = [](const Matrix& v, const ItemPermutation& p, const MarginalMatrix& y) {
      return grad_F(v, p, y);
    };
  }
  const bool full = o.level == VerifyLevel::kFull;
  const std::uint64_t samples = o.samples ? o.samples : (full ? 1'000'000 : 100'000);

  VerifyReport report;
  report.checks.push_back(check_brute_force(o, full ? 50 : 15));
  report.checks.push_back(check_gradient_fd(o, full ? 100 : 20));
  report.checks.push_back(check_concavity(o, 1000));
  report.checks.push_back(check_gradient_shift(o, 1000));
  report.checks.push_back(check_gradient_range(o, full ? 1000 : 200));
  report.checks.push_back(check_knapsack(o, full ? 200 : 50, full ? 20 : 12));
  report.checks.push_back(check_local_search(o, full ? 24 : 12, full ? 0.05 : 0.1));
  report.checks.push_back(check_dominate(o, 1000));
  report.checks.push_back(check_expectation(o, full ? 20 : 10, full ? 10 : 2, samples));
  report.checks.push_back(check_permutation_dominance(o, 200));
  report.checks.push_back(check_rounding_laws(o, full ? 5 : 1, samples));
  report.checks.push_back(check_payments(o, full ? 10 : 3, full ? 0.05 : 0.1));
  report.checks.push_back(check_worked_example());
  report.checks.push_back(check_truthfulness(o, full ? 10 : 1, full ? 0.01 : 0.05));
  return report;
}

}  // namespace gapmech
