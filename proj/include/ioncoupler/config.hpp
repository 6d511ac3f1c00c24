#pragma once

#include <optional>
#include <string>

#include "ioncoupler/harness.hpp"

namespace ioncoupler {

inline constexpr int kConfigSchemaVersion = 1;

// JSON configuration. Every physical key carries its unit as a suffix and
// most quantities accept two spellings, e.g. omega_l_hz (quoted as w/2pi) or
// omega_l_rad_s. The wells block is mandatory; the other blocks start from
// default_scenario() and override field by field. Unknown keys are errors.
//
// `scenario` overrides the file's own "scenario" entry. ConfigError names
// the offending field, or the line for syntax errors.
ScenarioConfig parse_config(const std::string& text, std::optional<Scenario> scenario = {});
ScenarioConfig load_config(const std::string& path, std::optional<Scenario> scenario = {});

// Wells only, for the modes command. Accepts a full scenario config too.
WellPair parse_wells(const std::string& text, double* max_frequency_ratio = nullptr);
WellPair load_wells(const std::string& path, double* max_frequency_ratio = nullptr);

// Fully resolved config in SI/angular units. Feeding it back through
// parse_config reproduces cfg exactly.
std::string config_to_json(const ScenarioConfig& cfg);

std::string read_text_file(const std::string& path);

}  // namespace ioncoupler
