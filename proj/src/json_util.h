#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "oboi/types.h"

namespace oboi::detail {

nlohmann::json label_space_to_json(const LabelSpace& space);
// Throws nlohmann::json::exception on malformed input.
LabelSpace label_space_from_json(const nlohmann::json& doc);

nlohmann::json read_json(const std::filesystem::path& path);
// Sorted keys, two-space indent, trailing newline.
void write_json(const std::filesystem::path& path, const nlohmann::json& doc);

// Rounds to 6 significant digits so reports print identically everywhere.
double round6(double value);

}  // namespace oboi::detail
