#pragma once

#include <string>

#include "aniso/limit_analysis.hpp"

namespace aniso::tools {

/// Versioned report document: {"schema_version":1, "study", "points",
/// "extrapolation", "target", "pass", ...}. Doubles are written with
/// round-trip precision.
std::string report_to_json(const ConvergenceReport& report);
/// Throws std::runtime_error on schema mismatches.
ConvergenceReport report_from_json(const std::string& text);

/// Writes report.json, points.csv and plot.dat into an existing directory.
void write_report_files(const ConvergenceReport& report, const std::string& dir);

/// Writes `content` to `path` in binary mode; throws std::runtime_error on failure.
void write_text_file(const std::string& path, const std::string& content);

}  // namespace aniso::tools
