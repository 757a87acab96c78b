#pragma once

#include <string>

#include "json.hpp"

#include "gapmech/instance.hpp"
#include "gapmech/local_search.hpp"
#include "gapmech/payments.hpp"

namespace gapmech {

struct MechanismRun;
struct WelfareEstimate;
struct TruthAudit;

using Json = nlohmann::json;

/// Instance file: {"n", "m", "capacities": [n], "values": [n][m], "weights": [n][m]}.
/// Throws ValidationError on missing fields, wrong types or dimension mismatch.
Instance instance_from_json(const Json& j);
Json to_json(const Instance& inst);

Instance read_instance_file(const std::string& path);
void write_json_file(const std::string& path, const Json& j);

/// FNV-1a 64 of the instance's compact JSON, as 16 hex digits.
std::string instance_digest(const Instance& inst);

Json to_json(const Matrix& m);
Json to_json(const Allocation& a);
Json to_json(const SearchConfig& cfg);
Json to_json(const SearchTrace& trace);
Json to_json(const PaymentReport& report);
Json to_json(const MechanismRun& run);
Json to_json(const WelfareEstimate& est);
Json to_json(const TruthAudit& audit);

}  // namespace gapmech
