#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "trustfed/engine.hpp"

namespace trustfed {

// The stock experiment: a complete graph on 45 clients, 30 of them
// Byzantine, logistic tasks in 5 dimensions, 1000 rounds, 50 realizations.
SimConfig default_config();

// Strict deserialization: unknown keys are rejected by their dotted path,
// and integer fields refuse negative values. A JSON null for a pinned
// field (eta, delta, attack.magnitude) means "use the derived default".
SimConfig config_from_json(const nlohmann::json& j);

nlohmann::json config_to_json(const SimConfig& config);

// One "key.path=value" assignment, applied on top of the serialized form.
// The value is parsed as JSON when possible and taken as a string
// otherwise, so `attack.kind=sign-flip` works without inner quotes.
void apply_override(SimConfig& config, const std::string& assignment);

// Reads a config file (empty or whitespace-only means "all defaults"),
// applies the overrides in order, then validates the result.
SimConfig parse_config(const std::filesystem::path& path,
                       const std::vector<std::string>& overrides = {});

}  // namespace trustfed
