#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "heatpat/anomaly.hpp"
#include "heatpat/kshape.hpp"
#include "heatpat/meter_csv.hpp"
#include "heatpat/modelselect.hpp"
#include "heatpat/profiles.hpp"
#include "heatpat/strategy.hpp"

// JSON and CSV forms of the pipeline artifacts. Every floating point value is
// rounded to 1e-10 before it is written, so reruns produce identical bytes.
namespace heatpat {

/// Rounds centroids and distances in place to the serialized precision. The
/// fingerprint of a canonical model survives a JSON round trip.
void canonicalize(ClusterModel& model);

struct ProfileRecord {
  HeatLoadProfile profile;
  NormalizedProfile normalized;
  CustomerCategory category{};
};

std::string profiles_to_json(std::span<const ProfileRecord> records, const SeasonPartition& partition);
/// Returns the normalized profiles and the category of every building.
std::vector<NormalizedProfile> profiles_from_json(std::string_view text, CategoryTable* categories = nullptr,
                                                  SeasonPartition* partition = nullptr);

std::string model_to_json(const ClusterModel& model, const SeasonPartition& partition);
ClusterModel model_from_json(std::string_view text);

std::string anomaly_report_to_json(const AnomalyReport& report, const AnomalyOptions& options);
AnomalyReport anomaly_report_from_json(std::string_view text);
void write_anomalies_csv(std::ostream& out, const AnomalyReport& report);

std::string sweep_to_json(const SilhouetteSweep& sweep);
void write_sweep_csv(std::ostream& out, const SilhouetteSweep& sweep);

std::string suggestions_to_json(std::span<const LabelSuggestion> suggestions);

/// Whole-file helpers. Writes go through a temporary file and a rename.
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace heatpat
