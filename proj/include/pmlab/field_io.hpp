#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"
#include "pmlab/field.hpp"

namespace pmlab {

/// Formats a double with 17 significant digits (round-trips exactly).
std::string format_exact(double value);

nlohmann::json layout_to_json(const Field& u);
std::vector<Axis> axes_from_json(const nlohmann::json& j);

/// Sidecar path for a field CSV: same stem, ".json" extension.
std::filesystem::path sidecar_path(const std::filesystem::path& csv);

/// Writes "x1,...,xn,u" rows for every stored node plus the JSON sidecar
/// {n, cell, h, slope, axes}.
void write_field(const std::filesystem::path& csv, const Field& u);
Field read_field(const std::filesystem::path& csv);

}  // namespace pmlab
