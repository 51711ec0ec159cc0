#pragma once

#include <json.hpp>

#include "hazrisk/group_diff.hpp"
#include "hazrisk/local_fit.hpp"
#include "hazrisk/relative_risk.hpp"
#include "hazrisk/simulation.hpp"

namespace hazrisk::cli {

// Non-finite values serialize as null.
nlohmann::json number(double v);

nlohmann::json to_json(const RelativeRiskEstimate& est);
nlohmann::json to_json(const GroupDiffEstimate& est);
nlohmann::json to_json(const LocalPolyFit& fit);
nlohmann::json to_json(const EstimatorConfig& config);

// Wall-clock runtime is left out so reports are reproducible byte for byte.
nlohmann::json to_json(const SimulationReport& report, const SimulationConfig& config);

}  // namespace hazrisk::cli
