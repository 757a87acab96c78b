#include "gapmech/io.hpp"

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "gapmech/mechanism.hpp"

namespace gapmech {

namespace {

std::vector<std::vector<double>> read_rows(const Json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_array()) {
    throw ValidationError(std::string("instance field '") + key + "' must be an array of rows");
  }
  std::vector<std::vector<double>> rows;
  for (const auto& r : j[key]) {
    if (!r.is_array()) throw ValidationError(std::string("'") + key + "' rows must be arrays");
    std::vector<double> row;
    for (const auto& x : r) {
      if (!x.is_number()) throw ValidationError(std::string("'") + key + "' entries must be numbers");
      row.push_back(x.get<double>());
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

Instance instance_from_json(const Json& j) {
  if (!j.is_object()) throw ValidationError("instance must be a JSON object");
  for (const char* key : {"n", "m"}) {
    if (!j.contains(key) || !j[key].is_number_integer()) {
      throw ValidationError(std::string("instance field '") + key + "' must be an integer");
    }
  }
  RawInstance raw;
  raw.n = j["n"].get<std::int64_t>();
  raw.m = j["m"].get<std::int64_t>();
  if (!j.contains("capacities") || !j["capacities"].is_array()) {
    throw ValidationError("instance field 'capacities' must be an array");
  }
  for (const auto& c : j["capacities"]) {
    if (!c.is_number()) throw ValidationError("'capacities' entries must be numbers");
    raw.capacities.push_back(c.get<double>());
  }
  raw.values = read_rows(j, "values");
  raw.weights = read_rows(j, "weights");
  return validate_instance(raw);
}

Json to_json(const Matrix& m) {
  Json rows = Json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    auto r = m.row(i);
    rows.push_back(std::vector<double>(r.begin(), r.end()));
  }
  return rows;
}

Json to_json(const Instance& inst) {
  Json j;
  j["n"] = inst.bins();
  j["m"] = inst.items();
  j["capacities"] = inst.capacities;
  j["values"] = to_json(inst.values);
  j["weights"] = to_json(inst.weights);
  return j;
}

Instance read_instance_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open instance file '" + path + "'");
  Json j;
  try {
    in >> j;
  } catch (const Json::parse_error& e) {
    throw ValidationError("instance file '" + path + "' is not valid JSON: " + e.what());
  }
  return instance_from_json(j);
}

void write_json_file(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << j.dump(2) << '\n';
}

std::string instance_digest(const Instance& inst) {
  const std::string text = to_json(inst).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Json to_json(const Allocation& a) {
  Json j = Json::array();
  for (const auto& s : a.sets) j.push_back(s);
  return j;
}

Json to_json(const SearchConfig& cfg) {
  return Json{{"eps", cfg.eps},
              {"delta", cfg.delta},
              {"z_cap", cfg.z_cap},
              {"max_iters", cfg.max_iters}};
}

Json to_json(const SearchTrace& trace) {
  Json iters = Json::array();
  for (const auto& r : trace.iterations) {
    iters.push_back(Json{{"F", r.objective},
                         {"gap", r.gap},
                         {"pool_size", r.pool_size},
                         {"stepped", r.stepped},
                         {"swapped", r.swapped}});
  }
  return Json{{"final_F", trace.final_objective},
              {"M", trace.scale},
              {"steps", trace.steps},
              {"hit_max_iters", trace.hit_max_iters},
              {"guarantee_void", trace.guarantee_void},
              {"iterations", iters}};
}

Json to_json(const PaymentReport& report) {
  Json bidders = Json::array();
  for (const auto& b : report.bidders) {
    bidders.push_back(Json{{"bidder", b.bidder},
                           {"h", b.pivot},
                           {"F_minus", b.others_value},
                           {"p_frac", b.frac_payment},
                           {"p_frac_raw", b.raw_frac_payment},
                           {"w_frac", b.frac_gain},
                           {"realized_value", b.realized_value},
                           {"payment", b.payment},
                           {"clamped", b.clamped}});
  }
  return Json{{"model", to_string(report.model)},
              {"F", report.objective},
              {"clamp_count", report.clamp_count()},
              {"bidders", bidders}};
}

Json to_json(const MechanismRun& run) {
  return Json{{"instance_digest", run.instance_digest},
              {"cfg", to_json(run.cfg)},
              {"seed", run.seed},
              {"bidders", to_string(run.bidders)},
              {"rounding", to_string(run.rounding)},
              {"y_star", to_json(run.y_star)},
              {"F", run.objective},
              {"x_components", run.x_components},
              {"x_bin_mass", run.x_bin_mass},
              {"allocation", to_json(run.allocation)},
              {"welfare", run.welfare},
              {"payments", to_json(run.payments)},
              {"trace",
               Json{{"iterations", run.trace.iterations},
                    {"steps", run.trace.steps},
                    {"pool_size", run.trace.pool_size},
                    {"hit_max_iters", run.trace.hit_max_iters},
                    {"guarantee_void", run.trace.guarantee_void}}}};
}

Json to_json(const WelfareEstimate& est) {
  Json j{{"F", est.objective},
         {"exact_expected_welfare", est.exact_expected},
         {"monte_carlo", Json{{"mean", est.monte_carlo.mean},
                              {"stderr", est.monte_carlo.stderr_},
                              {"samples", est.monte_carlo.samples}}},
         {"iterations", est.trace.iterations}};
  j["opt"] = est.opt ? Json(*est.opt) : Json(nullptr);
  j["ratio"] = est.ratio ? Json(*est.ratio) : Json(nullptr);
  return j;
}

namespace {

Json row_json(const UtilityRow& r) {
  return Json{{"factors", r.factors},
              {"report", r.report},
              {"expected_value", r.expected_value},
              {"expected_payment", r.expected_payment},
              {"utility", r.utility}};
}

}  // namespace

Json to_json(const TruthAudit& audit) {
  Json mis = Json::array();
  for (const auto& r : audit.misreports) mis.push_back(row_json(r));
  return Json{{"model", to_string(audit.model)},
              {"bidder", audit.bidder},
              {"slack", audit.slack},
              {"truthful", row_json(audit.truthful)},
              {"misreports", mis},
              {"violations", audit.violations},
              {"within_slack", audit.within_slack},
              {"passed", audit.passed()}};
}

}  // namespace gapmech
