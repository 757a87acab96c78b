#include "gapmech/local_search.hpp"

#include <cmath>
#include <limits>
#include <string>

#include <omp.h>

#include "gapmech/knapsack.hpp"

namespace gapmech {

SearchConfig SearchConfig::make(double eps, std::size_t bins, std::size_t items) {
  SearchConfig cfg;
  cfg.eps = eps;
  const double n = static_cast<double>(bins);
  const double m = static_cast<double>(items);
  cfg.delta = eps / (6.0 * m * n * n);
  // 1/delta is an integer for the usual eps choices; the relative nudge keeps
  // representation error in eps from costing a slot.
  cfg.z_cap = static_cast<std::size_t>(std::floor((1.0 / cfg.delta) * (1.0 + 1e-12)));
  cfg.max_iters = static_cast<std::uint64_t>(std::ceil(12.0 * m * m * n * n / (eps * eps)));
  return cfg;
}

void SearchConfig::check(std::size_t bins, std::size_t items) const {
  if (!(eps > 0.0 && eps < 1.0)) throw ValidationError("eps must lie in (0, 1)");
  const SearchConfig ref = make(eps, bins, items);
  if (delta != ref.delta) throw ValidationError("delta must equal eps / (6 m n^2)");
  if (z_cap < 1) throw ValidationError("Z capacity must be at least 1");
  if (max_iters < 1) throw ValidationError("max_iters must be at least 1");
}

void IndicatorPool::add(const Bits& bits, std::uint64_t stamp) {
  auto it = index_.find(bits);
  if (it == index_.end()) {
    index_.emplace(bits, patterns_.size());
    patterns_.push_back(Pattern{bits, {stamp}});
  } else {
    patterns_[it->second].stamps.push_back(stamp);
  }
  ++size_;
}

IndicatorPool::Bits IndicatorPool::evict_min(const Matrix& u) {
  auto flat = u.flat();
  std::size_t best = patterns_.size();
  double best_score = std::numeric_limits<double>::infinity();
  for (std::size_t p = 0; p < patterns_.size(); ++p) {
    double score = 0.0;
    for (std::size_t k = 0; k < flat.size(); ++k) {
      if (patterns_[p].bits[k]) score += flat[k];
    }
    if (best == patterns_.size() || score < best_score ||
        (score == best_score && patterns_[p].stamps.front() < patterns_[best].stamps.front())) {
      best = p;
      best_score = score;
    }
  }
  Bits out = patterns_[best].bits;
  patterns_[best].stamps.pop_front();
  --size_;
  if (patterns_[best].stamps.empty()) {
    patterns_.erase(patterns_.begin() + static_cast<std::ptrdiff_t>(best));
    index_.clear();
    for (std::size_t p = 0; p < patterns_.size(); ++p) index_.emplace(patterns_[p].bits, p);
  }
  return out;
}

Matrix IndicatorPool::scaled_sum(double delta) const {
  Matrix y(bins_, items_);
  auto flat = y.flat();
  for (const auto& p : patterns_) {
    const double mass = delta * static_cast<double>(p.stamps.size());
    for (std::size_t k = 0; k < flat.size(); ++k) {
      if (p.bits[k]) flat[k] += mass;
    }
  }
  return y;
}

namespace {

IndicatorPool::Bits best_response(const Instance& inst, const Matrix& u, double eps) {
  const std::size_t n = inst.bins();
  const std::size_t m = inst.items();
  IndicatorPool::Bits bits(n * m, 0);
  const auto bins = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(dynamic) if (n * m >= 4096)
  for (std::int64_t b = 0; b < bins; ++b) {
    const auto i = static_cast<std::size_t>(b);
    KnapsackProblem kp;
    kp.profits.assign(u.row(i).begin(), u.row(i).end());
    kp.weights.assign(inst.weights.row(i).begin(), inst.weights.row(i).end());
    kp.capacity = inst.capacities[i];
    for (std::size_t j : knapsack_fptas(kp, eps)) bits[i * m + j] = 1;
  }
  return bits;
}

}  // namespace

SearchResult maximize_F(const Instance& inst, const SearchConfig& cfg,
                        const SearchObserver& observer) {
  const std::size_t n = inst.bins();
  const std::size_t m = inst.items();
  cfg.check(n, m);

  SearchResult out;
  out.x = SparseFractionalAssignment(n, m);
  out.y = MarginalMatrix(n, m);
  out.trace.scale = inst.allocatable_max_value();
  out.trace.guarantee_void = cfg.eps > 1.0 / static_cast<double>(n);
  if (out.trace.scale == 0.0) return out;

  const ItemPermutation perm = value_sorted_permutation(inst);
  const double threshold = cfg.eps * out.trace.scale;
  IndicatorPool pool(n, m);
  std::vector<std::int64_t> counts(n * m, 0);
  MarginalMatrix& y = out.y;

  for (std::uint64_t iter = 0;; ++iter) {
    const Matrix u = grad_F(inst, perm, y);
    IterationRecord rec;
    rec.objective = eval_F(inst, perm, y);

    const IndicatorPool::Bits z = best_response(inst, u, cfg.eps);
    auto uf = u.flat();
    auto yf = y.flat();
    double gap = 0.0;
    for (std::size_t k = 0; k < uf.size(); ++k) gap += (z[k] - yf[k]) * uf[k];
    rec.gap = gap;

    if (!(gap > threshold)) {
      rec.pool_size = pool.size();
      out.trace.iterations.push_back(rec);
      break;
    }
    if (out.trace.steps >= cfg.max_iters) {
      out.trace.hit_max_iters = true;
      rec.pool_size = pool.size();
      out.trace.iterations.push_back(rec);
      break;
    }

    if (pool.size() < cfg.z_cap) {
      pool.add(z, iter);
      for (std::size_t k = 0; k < counts.size(); ++k) counts[k] += z[k];
    } else {
      const IndicatorPool::Bits evicted = pool.evict_min(u);
      pool.add(z, iter);
      for (std::size_t k = 0; k < counts.size(); ++k) counts[k] += z[k] - evicted[k];
      rec.swapped = true;
    }
    for (std::size_t k = 0; k < counts.size(); ++k) {
      yf[k] = cfg.delta * static_cast<double>(counts[k]);
    }
    rec.stepped = true;
    rec.pool_size = pool.size();
    ++out.trace.steps;
    out.trace.iterations.push_back(rec);

    if (observer) observer(SearchSnapshot{iter, y, z, pool, cfg.delta});
  }

  out.objective = eval_F(inst, perm, y);
  out.trace.final_objective = out.objective;

  // Rebuild x: every copy of a pattern adds delta to (i, S_i) for each bin.
  for (const auto& p : pool.patterns()) {
    const double mass = cfg.delta * static_cast<double>(p.stamps.size());
    for (std::size_t i = 0; i < n; ++i) {
      ItemSet s;
      for (std::size_t j = 0; j < m; ++j) {
        if (p.bits[i * m + j]) s.push_back(j);
      }
      out.x.add(i, std::move(s), mass);
    }
  }
  return out;
}

MembershipReport certify_membership(const Instance& inst, const SparseFractionalAssignment& x,
                                    double tol) {
  MembershipReport r;
  r.bin_mass.resize(x.bins());
  for (std::size_t i = 0; i < x.bins(); ++i) {
    for (const auto& c : x.components(i)) {
      if (c.mass < 0.0) r.overfull_bins.push_back(i);
      if (c.mass > 0.0) ++r.positive_components;
      r.bin_mass[i] += c.mass;
      if (!is_feasible_set(inst, i, c.items)) r.infeasible_sets.emplace_back(i, c.items);
    }
    if (r.bin_mass[i] > 1.0 + tol) r.overfull_bins.push_back(i);
  }
  return r;
}

}  // namespace gapmech
