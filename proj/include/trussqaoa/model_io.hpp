#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "trussqaoa/truss.hpp"

namespace trussqaoa {

/// Parses the JSON truss format:
///   {"nodes": [{"id", "x", "y", "fix": [bx, by], "load": [fx, fy]}],
///    "rods": [{"id", "i", "j"}],
///    "material": {"E", "A0"}}
/// Syntax errors carry the offending line; schema errors name the field.
/// Throws InputError.
TrussModel parse_model_json(std::string_view text);

TrussModel load_model_file(const std::filesystem::path& path);

std::string model_to_json(const TrussModel& model);

}  // namespace trussqaoa
