#pragma once

// JSON ingestion and serialization of instances, uncertainty configs,
// decisions and scenarios.

#include <optional>
#include <string>

#include <json.hpp>

#include "robnet/model.hpp"
#include "robnet/scenario.hpp"
#include "robnet/uncertainty.hpp"

namespace robnet {

using Json = nlohmann::ordered_json;

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

// Syntax errors raise ParseError with the offending line; schema and
// invariant violations raise ValidationError naming the element.
Json parse_json(const std::string& text);

Instance instance_from_json(const Json& doc);
Instance parse_instance(const std::string& text);
Instance load_instance(const std::string& path);
Json instance_to_json(const Instance& instance);

UncertaintyConfig uncertainty_config_from_json(const Json& doc);
Json uncertainty_config_to_json(const UncertaintyConfig& config);

// The "uncertainty" block of an instance document, if present.
std::optional<UncertaintyConfig> embedded_uncertainty(const Json& instance_doc);

// Decision file: JSON array of built arc ids.
ExpansionDecision decision_from_json(const Instance& instance, const Json& doc);
ExpansionDecision load_decision(const Instance& instance, const std::string& path);
Json decision_to_json(const Instance& instance, const ExpansionDecision& decision);

// Scenario as an object keyed by node id; missing nodes load 0.
Scenario scenario_from_json(const Instance& instance, const Json& doc);
Json scenario_to_json(const Instance& instance, const Scenario& scenario);

// Number or null (null encodes an infinite value).
Json number_or_null(double value);

}  // namespace robnet
