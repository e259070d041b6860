#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "heatpat/anomaly.hpp"
#include "heatpat/artifacts.hpp"
#include "heatpat/kshape.hpp"
#include "heatpat/meter_csv.hpp"
#include "heatpat/meterdata.hpp"
#include "heatpat/modelselect.hpp"
#include "heatpat/profiles.hpp"
#include "heatpat/strategy.hpp"

namespace heatpat {

inline constexpr std::string_view kToolVersion = "heatpat 0.1.0";

struct SweepRange {
  std::size_t k_min = 2;
  std::size_t k_max = 8;
  bool operator==(const SweepRange&) const = default;
};

/// Everything a run depends on. Stored as JSON; see README for the schema.
struct PipelineConfig {
  std::vector<std::filesystem::path> inputs;
  std::optional<std::filesystem::path> metadata;
  std::string partition = "4-season";
  /// Fixed k. Without it the sweep's recommendation is used.
  std::optional<std::size_t> k;
  std::optional<SweepRange> sweep;
  std::uint64_t seed = 1;
  int max_iter = 100;
  int n_init = 10;
  int restarts = 1;  // best-silhouette runs per k in the sweep
  double sigma_multiplier = 3.0;
  CleaningParams cleaning;
  std::filesystem::path output_dir = "heatpat-out";

  /// Throws InvalidConfig naming the first offending field.
  void validate() const;
  bool operator==(const PipelineConfig& other) const;
};

std::string config_to_json(const PipelineConfig& config);
/// Unknown keys are rejected so that typos do not pass silently.
PipelineConfig config_from_json(std::string_view text);
PipelineConfig load_config(const std::filesystem::path& path);

struct StageIssue {
  std::string building_id;
  std::string stage;
  std::string code;
  std::string message;
};

struct StageCounts {
  std::size_t ingested = 0;
  std::map<std::string, std::size_t> rejected_by_reason;
  std::size_t rejected = 0;
  std::size_t profiled = 0;
  std::size_t degenerate = 0;
  std::size_t clustered = 0;
  std::size_t abnormal = 0;
  std::size_t final_clustered = 0;
  std::size_t repaired_readings = 0;

  /// ingested = rejected + profiled, profiled = degenerate + clustered,
  /// clustered = abnormal + final_clustered.
  bool consistent() const;
};

struct RunManifest {
  std::string config_json;
  StageCounts counts;
  std::size_t k = 0;
  std::string k_source;  // "config" or "sweep"
  std::optional<double> silhouette_initial;
  std::optional<double> silhouette_final;
  std::string fingerprint;
  std::string tool_version{kToolVersion};
  std::vector<std::string> warnings;
  std::vector<StageIssue> issues;
};

std::string manifest_to_json(const RunManifest& manifest);
RunManifest manifest_from_json(std::string_view text);

struct PipelineOutputs {
  RunManifest manifest;
  SeasonPartition partition;
  std::vector<ScreeningRow> screening;
  std::vector<ProfileRecord> profiles;  // clustered profiles, input order
  std::optional<SilhouetteSweep> sweep;
  ClusterModel initial;
  AnomalyReport initial_report;
  ClusterModel final_model;
  AnomalyReport final_report;
  StrategyLabeling labeling;
  std::vector<SuitabilityFlag> flags;
  std::vector<LabelSuggestion> suggestions;
};

/// Clean, profile, normalize, (sweep), cluster, detect, remove, cluster again.
/// Per-building failures are recorded in the manifest; only TooFewProfiles
/// and configuration errors abort.
PipelineOutputs run_on_series(std::vector<RawMeterSeries> series, const PipelineConfig& config,
                              std::vector<std::string> ingest_warnings = {});

/// Artifact file names in the store.
namespace store {
inline constexpr std::string_view kManifest = "manifest.json";
inline constexpr std::string_view kConfig = "config.json";
inline constexpr std::string_view kScreening = "screening.csv";
inline constexpr std::string_view kProfiles = "profiles.json";
inline constexpr std::string_view kModelInitial = "model_initial.json";
inline constexpr std::string_view kModelFinal = "model_final.json";
inline constexpr std::string_view kAnomalyReport = "anomaly_report.json";
inline constexpr std::string_view kAnomalyReportFinal = "anomaly_report_final.json";
inline constexpr std::string_view kAnomalies = "anomalies.csv";
inline constexpr std::string_view kSweepCsv = "sweep.csv";
inline constexpr std::string_view kSweepJson = "sweep.json";
inline constexpr std::string_view kLabeling = "labeling.json";
inline constexpr std::string_view kFlags = "flags.csv";
inline constexpr std::string_view kSuggestions = "suggestions.json";
}  // namespace store

/// Writes every artifact into `dir` (created if needed). An existing labeling
/// whose fingerprint matches the new final model is kept and used for the
/// flags; a stale one is moved aside to labeling.<fingerprint>.json.
void write_store(PipelineOutputs& outputs, const std::filesystem::path& dir);

/// Reads the inputs named by the config, runs, and writes the store.
PipelineOutputs run(const PipelineConfig& config);

std::string flags_csv(std::span<const SuitabilityFlag> flags);

}  // namespace heatpat
