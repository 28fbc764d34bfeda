#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"

#include "recembed/point_set.hpp"

namespace recembed {

/// Writes `<path>` (one point per row, plain decimal) and the JSON sidecar
/// `<path>.json` holding {"n", "d", "p", "ids"}.
void write_point_set(const std::filesystem::path& csv_path, const PointSet& s,
                     const nlohmann::json& extra = nlohmann::json::object());

/// Reads both files and validates that they agree.
PointSet read_point_set(const std::filesystem::path& csv_path);

std::filesystem::path sidecar_path(const std::filesystem::path& csv_path);

/// Writes to a sibling temp file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

std::string read_file(const std::filesystem::path& path);

/// Fixed 9-significant-digit formatting used for every result CSV.
std::string format_sig9(double value);

/// Shortest round-trip formatting, used for point coordinates.
std::string format_exact(double value);

}  // namespace recembed
