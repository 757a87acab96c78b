#include <cmath>
#include <cstdint>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "gapmech/io.hpp"
#include "gapmech/local_search.hpp"
#include "gapmech/mechanism.hpp"
#include "gapmech/verify.hpp"

using namespace gapmech;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 1;
constexpr int kExitVerifyFailed = 2;

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> grid;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(tok, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != tok.size() || !(v > 0.0) || !std::isfinite(v)) {
      throw ValidationError("grid entry '" + tok + "' is not a positive number");
    }
    grid.push_back(v);
  }
  if (grid.empty()) throw ValidationError("grid must contain at least one factor");
  return grid;
}

SearchConfig config_for(const Instance& inst, double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw ValidationError("--eps must lie in (0, 1)");
  return SearchConfig::make(eps, inst.bins(), inst.items());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Truthful-in-expectation mechanism for the generalized assignment problem"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "Generate a random instance");
  std::size_t gen_bins = 0, gen_items = 0;
  std::uint64_t gen_seed = 0;
  std::string gen_profile = "uniform", gen_out;
  gen->add_option("--bins", gen_bins, "Number of bins")->required();
  gen->add_option("--items", gen_items, "Number of items")->required();
  gen->add_option("--seed", gen_seed, "Generator seed")->required();
  gen->add_option("--profile", gen_profile, "uniform|correlated|knapsack-hard");
  gen->add_option("--out", gen_out, "Output instance file")->required();

  // solve
  auto* solve = app.add_subcommand("solve", "Maximize the concave surrogate by local search");
  std::string solve_instance, solve_trace;
  double solve_eps = 0.1;
  solve->add_option("--instance", solve_instance)->required();
  solve->add_option("--eps", solve_eps)->required();
  solve->add_option("--trace", solve_trace, "Write the per-iteration trace as JSON");

  // run
  auto* run = app.add_subcommand("run", "Solve, round and compute payments");
  std::string run_instance, run_out, run_bidders = "bins", run_rounding = "greedy";
  double run_eps = 0.1;
  std::uint64_t run_seed = 0;
  run->add_option("--instance", run_instance)->required();
  run->add_option("--eps", run_eps)->required();
  run->add_option("--seed", run_seed)->required();
  run->add_option("--bidders", run_bidders, "bins|items");
  run->add_option("--rounding", run_rounding, "greedy|simplified");
  run->add_option("--out", run_out)->required();

  // estimate
  auto* est = app.add_subcommand("estimate", "Expected welfare: Monte Carlo, closed form and OPT");
  std::string est_instance, est_rounding = "greedy";
  double est_eps = 0.1;
  std::uint64_t est_samples = 100'000, est_seed = 0;
  est->add_option("--instance", est_instance)->required();
  est->add_option("--eps", est_eps)->required();
  est->add_option("--samples", est_samples);
  est->add_option("--seed", est_seed);
  est->add_option("--rounding", est_rounding, "greedy|simplified");

  // audit-truth
  auto* audit = app.add_subcommand("audit-truth", "Exact expected utility, truthful vs misreports");
  std::string audit_instance, audit_grid = "0.5,0.75,0.9,1.1,1.25,1.5,2", audit_bidders = "bins";
  double audit_eps = 0.1, audit_slack = 0.05;
  std::size_t audit_bidder = 0;
  audit->add_option("--instance", audit_instance)->required();
  audit->add_option("--eps", audit_eps)->required();
  audit->add_option("--bidder", audit_bidder)->required();
  audit->add_option("--grid", audit_grid, "Comma-separated misreport factors");
  audit->add_option("--bidders", audit_bidders, "bins|items");
  audit->add_option("--slack", audit_slack, "Relative utility slack");

  // verify
  auto* ver = app.add_subcommand("verify", "Run the built-in invariant checks");
  std::string ver_level = "quick";
  std::uint64_t ver_samples = 0, ver_seed = 2024;
  ver->add_option("--level", ver_level, "quick|full");
  ver->add_option("--samples", ver_samples, "Monte Carlo samples (0 = level default)");
  ver->add_option("--seed", ver_seed);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInvalid;
  }

  try {
    if (*gen) {
      if (gen_bins < 1 || gen_items < 1) throw ValidationError("--bins and --items must be >= 1");
      const Instance inst = generate_instance(gen_bins, gen_items, gen_seed, parse_profile(gen_profile));
      write_json_file(gen_out, to_json(inst));
      return kExitOk;
    }
    if (*solve) {
      const Instance inst = read_instance_file(solve_instance);
      const SearchConfig cfg = config_for(inst, solve_eps);
      const SearchResult res = maximize_F(inst, cfg);
      std::size_t comps = 0;
      Json per_bin = Json::array();
      for (std::size_t i = 0; i < inst.bins(); ++i) {
        per_bin.push_back(res.x.components(i).size());
        comps += res.x.components(i).size();
      }
      std::cout << Json{{"F", res.objective},
                        {"iterations", res.trace.iterations.size()},
                        {"steps", res.trace.steps},
                        {"components", comps},
                        {"components_per_bin", per_bin},
                        {"hit_max_iters", res.trace.hit_max_iters},
                        {"guarantee_void", res.trace.guarantee_void}}
                       .dump(2)
                << '\n';
      if (!solve_trace.empty()) write_json_file(solve_trace, to_json(res.trace));
      return kExitOk;
    }
    if (*run) {
      const Instance inst = read_instance_file(run_instance);
      const SearchConfig cfg = config_for(inst, run_eps);
      const MechanismRun r = run_mechanism(inst, cfg, run_seed, parse_bidder_model(run_bidders),
                                           parse_rounding_mode(run_rounding));
      write_json_file(run_out, to_json(r));
      return kExitOk;
    }
    if (*est) {
      const Instance inst = read_instance_file(est_instance);
      const SearchConfig cfg = config_for(inst, est_eps);
      if (est_samples < 2) throw ValidationError("--samples must be >= 2");
      const WelfareEstimate w =
          estimate_welfare(inst, cfg, est_samples, est_seed, parse_rounding_mode(est_rounding));
      std::cout << to_json(w).dump(2) << '\n';
      return kExitOk;
    }
    if (*audit) {
      const Instance inst = read_instance_file(audit_instance);
      const SearchConfig cfg = config_for(inst, audit_eps);
      const BidderModel model = parse_bidder_model(audit_bidders);
      const std::size_t bidders = model == BidderModel::kBins ? inst.bins() : inst.items();
      if (audit_bidder >= bidders) throw ValidationError("--bidder out of range");
      if (!(audit_slack >= 0.0 && audit_slack < 1.0)) throw ValidationError("--slack must lie in [0, 1)");
      const TruthAudit a =
          audit_truthfulness(inst, cfg, model, audit_bidder, parse_grid(audit_grid), audit_slack);
      std::cout << to_json(a).dump(2) << '\n';
      return a.passed() ? kExitOk : kExitVerifyFailed;
    }
    if (*ver) {
      VerifyOptions opts;
      opts.level = parse_verify_level(ver_level);
      opts.samples = ver_samples;
      opts.seed = ver_seed;
      const VerifyReport report = verify_suite(opts);
      std::cout << report.to_json().dump(2) << '\n';
      return report.passed() ? kExitOk : kExitVerifyFailed;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvalid;
  }
  return kExitOk;
}
