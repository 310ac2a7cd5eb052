#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "moodtune/fixture_catalog.hpp"
#include "moodtune/pipeline.hpp"
#include "moodtune/stats.hpp"

namespace moodtune::commands {

enum ExitCode : int {
  kExitOk = 0,
  kExitValidation = 1,
  kExitIo = 2,
  kExitProvider = 3,
};

enum class OutputFormat { Text, Machine };

OutputFormat parse_format(std::string_view text);

struct IngestReport {
  std::filesystem::path path;
  catalog::FixtureCounts counts;
  std::vector<catalog::SchemaViolation> violations;
};

/// Parses and validates a fixture catalog. Throws FixtureIoError when the
/// file cannot be read and FixtureParseError when it is not JSON; schema
/// problems are collected into the report instead.
IngestReport ingest(const std::filesystem::path& path);
std::string render(const IngestReport& report, OutputFormat format);

struct ArmSummary {
  double mean_distance = 0.0;
  std::map<std::string, std::size_t> selections;  // canonical_id -> count
};

struct SimulationReport {
  MoodCategory mood = MoodCategory::Neutral;
  std::size_t trials = 0;
  std::uint64_t seed = 0;
  std::size_t pool_size = 0;
  std::vector<std::string> seed_ids;
  ArmSummary treatment;
  ArmSummary control;
  std::size_t treatment_first = 0;
};

/// Runs `trials` offline pairs from one candidate pool built off the
/// provider's top tracks. Distances are Euclidean to the mood's target
/// point. Zero trials returns an empty report without touching the provider.
SimulationReport simulate(catalog::CatalogProvider& provider, MoodCategory mood,
                          std::size_t trials, std::uint64_t seed,
                          const pipeline::PipelineConfig& config);
std::string render(const SimulationReport& report, OutputFormat format);

struct ArmStatistics {
  stats::Histogram histogram{};
  double mean = 0.0;
  std::size_t count = 0;
};

struct AnalysisReport {
  ArmStatistics control;
  ArmStatistics treatment;
  stats::MidrankTable midranks{};
  stats::UTestResult best_first;
  stats::MidrankTable corrected_midranks{};
  stats::UTestResult corrected;
  std::vector<stats::MoodMeans> by_mood;
};

/// Full rating analysis. Throws ValidationError when either arm has no rows.
AnalysisReport analyze(const std::vector<ExportRow>& rows);
std::string render(const AnalysisReport& report, OutputFormat format);

}  // namespace moodtune::commands
