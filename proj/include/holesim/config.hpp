#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "holesim/engine.hpp"

namespace holesim {

/// Syntax error in a scenario file; the message carries the line number.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses the TOML subset used by scenario files: [section] headers,
/// `key = value` pairs with numbers, booleans, double-quoted strings and
/// (nested) arrays, and `#` comments. Result is {section: {key: value}}.
nlohmann::json parse_config_text(std::string_view text);

struct ScenarioFile {
  Scenario scenario;
  // Axis defaults for `sweep` when the command line gives none.
  std::vector<int> sweep_nodes;
  std::vector<double> sweep_failures;
};

/// Maps a parsed document onto a scenario. Unknown keys, wrong types,
/// missing required keys and every Scenario::violations() entry are
/// collected and thrown together as a ValidationError.
ScenarioFile scenario_from_document(const nlohmann::json& doc);

/// Reads and maps a scenario file. Throws ConfigError on I/O or syntax
/// problems, ValidationError on content problems.
ScenarioFile load_scenario_file(const std::filesystem::path& path);

/// Every accepted "section.key" name, in documentation order.
std::vector<std::string> config_keys();

/// Resolved value of every key for `file`, same shape as the parsed
/// document, plus the PRNG algorithm under "meta".
nlohmann::json config_echo(const ScenarioFile& file);

}  // namespace holesim
