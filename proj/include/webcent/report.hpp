#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "webcent/pipeline.hpp"

namespace webcent::pipeline {

enum class ReportFormat { Csv, Json };

struct EmitOptions {
  ReportFormat format = ReportFormat::Csv;
  bool band = false;  // adds the concentration band column to score tables
};

// Fixed-point with four decimals, "-0.0000" normalized to "0.0000".
std::string format_fixed4(double value);

void write_scores_csv(std::ostream& out, const LayerScores& scores, const Report& report, bool band);
void write_regional_csv(std::ostream& out, const Report& report);
void write_insularity_csv(std::ostream& out, const Report& report);
void write_correlations_csv(std::ostream& out, const Report& report);
void write_classes_csv(std::ostream& out, const Report& report);
void write_exclusions_csv(std::ostream& out, const Report& report);

void to_json(nlohmann::json& j, const Report& report);
void from_json(const nlohmann::json& j, Report& report);

// Writes the bundle into `directory`, creating it if needed, and returns the
// files written. CSV: one file per table, exclusions.csv only when there are
// exclusions. JSON: a single report.json. Throws Error when a file cannot be
// written.
std::vector<std::filesystem::path> emit_report(const Report& report,
                                               const std::filesystem::path& directory,
                                               const EmitOptions& options = {});

}  // namespace webcent::pipeline
