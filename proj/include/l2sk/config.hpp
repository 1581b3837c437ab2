#pragma once

#include "l2sk/harness.hpp"

#include <map>
#include <string>
#include <variant>
#include <vector>

namespace l2sk {

// Minimal TOML-style reader covering what the harness config needs:
// [section] headers, key = value with numbers, booleans, quoted strings and
// flat numeric arrays, '#' comments.
using ConfigValue = std::variant<double, bool, std::string, std::vector<double>>;
using ConfigSection = std::map<std::string, ConfigValue>;
using ConfigDoc = std::map<std::string, ConfigSection>;

ConfigDoc parse_config(const std::string& text);
ConfigDoc load_config_file(const std::string& path);

/// Applies the recognized keys of [constants], [orbit], [gains], [mpc] and
/// [scenario] on top of `base`. Unknown keys raise ConfigError.
ScenarioConfig apply_config(const ConfigDoc& doc, ScenarioConfig base);

} // namespace l2sk
