#pragma once

#include <nlohmann/json.hpp>

#include <string>
#include <string_view>

namespace evoprune {

inline constexpr std::string_view kMazeFormat = "evoprune-maze/1";
inline constexpr std::string_view kGenomeFormat = "evoprune-genome/1";
inline constexpr std::string_view kPopulationFormat = "evoprune-population/1";
inline constexpr std::string_view kCheckpointFormat = "evoprune-checkpoint/1";
inline constexpr std::string_view kConfigFormat = "evoprune-config/1";
inline constexpr std::string_view kTraceFormat = "evoprune-trace/1";
inline constexpr std::string_view kTableFormat = "evoprune-table/1";
inline constexpr std::string_view kValidationFormat = "evoprune-validation/1";

/// Throws FormatError unless j["format"] equals `expected`.
void check_format(const nlohmann::json& j, std::string_view expected);

/// Shortest round-trip decimal representation.
std::string format_double(double value);

std::string read_file(const std::string& path);
/// Writes through a temporary file and renames, so readers never see a
/// partial artifact.
void write_file(const std::string& path, const std::string& contents);

}  // namespace evoprune
