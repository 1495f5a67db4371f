#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "dtadag/bias.hpp"
#include "dtadag/estimators.hpp"
#include "dtadag/scenario.hpp"

namespace dta {

/// Canonical rendering used by every machine-readable output: sorted keys,
/// two-space indent, LF, UTF-8, trailing newline. Identical values produce
/// byte-identical text.
std::string canonical_json(const nlohmann::json& j);

nlohmann::json to_json(const Path& path);
nlohmann::json to_json(const BiasFinding& finding);
nlohmann::json to_json(const std::vector<BiasFinding>& findings);
nlohmann::json to_json(const AccuracyEstimate& estimate);
nlohmann::json to_json(const BiasReport& report);
nlohmann::json to_json(const LcaResult& result);
nlohmann::json to_json(const ScenarioReport& report);

nlohmann::json scenario_to_json(const Scenario& scenario);
Scenario scenario_from_json(const nlohmann::json& j, std::vector<std::string>* warnings);

}  // namespace dta
