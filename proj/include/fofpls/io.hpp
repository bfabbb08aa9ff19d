#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "fofpls/benchmark.hpp"
#include "fofpls/design.hpp"
#include "fofpls/model.hpp"
#include "fofpls/selection.hpp"

namespace fofpls {

inline constexpr int kArchiveFormatVersion = 1;

/// A curve table as stored on disk: one row per curve, led by its id.
struct CurveTable {
  std::vector<std::string> ids;
  FunctionalSample sample;
};

/// Shortest decimal text that reads back to the same double.
std::string format_double(double x);

/// Header "id,<grid points>"; each row "id,<values>". Throws Io or Parse errors
/// naming the file and line.
CurveTable read_curves_csv(const std::filesystem::path& path);
std::string curves_to_csv(const CurveTable& table);
std::string curves_to_csv(const FunctionalSample& sample);  // ids 1..N
void write_curves_csv(const std::filesystem::path& path, const CurveTable& table);
void write_curves_csv(const std::filesystem::path& path, const FunctionalSample& sample);

/// Terms syntax: "main=2,3;inter=2:2,3:4". Either part may be omitted.
TermSet parse_terms(const std::string& text);
std::string format_terms(const TermSet& terms);

nlohmann::json model_to_json(const FittedModel& model);
/// Rebuilds bases and metrics from their defining data; predictions match the
/// saved model exactly. The training design matrix is not stored.
FittedModel model_from_json(const nlohmann::json& doc);
void save_model(const std::filesystem::path& path, const FittedModel& model);
FittedModel load_model(const std::filesystem::path& path);

/// Long format with columns term,s,r,t,value; r is empty for main effects.
std::string surfaces_to_csv(const CoefficientSurfaces& surfaces, const TermSet& terms);

nlohmann::json trace_to_json(const SelectionTrace& trace);

std::string report_to_csv(const BenchmarkReport& report);
std::string replicates_to_csv(const BenchmarkReport& report);
std::string report_to_text(const BenchmarkReport& report);

/// Writes to a sibling temporary file and renames it over `path`.
void atomic_write(const std::filesystem::path& path, const std::string& content);
std::string read_text(const std::filesystem::path& path);

}  // namespace fofpls
