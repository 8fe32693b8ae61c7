#pragma once

#include <string>

#include <json.hpp>

#include "fisher/market.hpp"

namespace fisher {

// JSON uses insertion order so files stay readable and diffs stay stable.
using Json = nlohmann::ordered_json;

// Instance documents look like:
//   {
//     "buyers": 2, "goods": 3,
//     "valuations": [[1.0, 1.0, 1.0], [1.0, 1.0, 1.0]],
//     "budgets": [1.0, 1.0],
//     "capacities": [2.0, 0.5, 0.5],
//     "divisible": true,        // optional, default true
//     "alphas": [0.5, 0.0]      // optional, snob sensitivities
//   }
// Unknown keys are rejected by name; a typo should fail loudly, not load as
// a subtly different market. Serialized doubles round-trip bit for bit.
Json instance_to_json(const MarketInstance& inst);
MarketInstance instance_from_json(const Json& doc);

// File variants throw MarketError(kBadInput) with the path in the message.
MarketInstance load_instance(const std::string& path);
void save_instance(const MarketInstance& inst, const std::string& path);

Json report_to_json(const EquilibriumReport& report);
EquilibriumReport report_from_json(const Json& doc);

void save_report(const EquilibriumReport& report, const std::string& path);
EquilibriumReport load_report(const std::string& path);

// Shared helpers for anything that serializes matrices.
Json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const Json& doc, const std::string& field);

}  // namespace fisher
