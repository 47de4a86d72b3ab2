#pragma once

#include <filesystem>
#include <string_view>

#include <nlohmann/json.hpp>

namespace driftloc {

/// Parses the TOML subset used by configs: [tables], [[arrays of tables]],
/// dotted keys, strings, integers, floats, booleans, arrays and inline tables.
/// Errors carry the line number.
nlohmann::json parse_toml(std::string_view text);

/// Loads a JSON or TOML config; `.toml` selects TOML, anything else JSON.
nlohmann::json load_config(const std::filesystem::path& path);

}  // namespace driftloc
