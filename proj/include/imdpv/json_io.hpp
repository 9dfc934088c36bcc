#pragma once

#include "imdpv/grid.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace imdpv {

nlohmann::json to_json(const Vector& v);
Vector vector_from_json(const nlohmann::json& j, const std::string& where);

nlohmann::json to_json(const Grid& grid);
Grid grid_from_json(const nlohmann::json& j, const std::string& where);

/// Parses every non-blank line of a JSON-lines file; errors carry file:line.
std::vector<nlohmann::json> read_json_lines(const std::filesystem::path& path);

} // namespace imdpv
