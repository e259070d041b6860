#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "heatpat/kshape.hpp"
#include "heatpat/meter_csv.hpp"
#include "heatpat/profiles.hpp"

namespace heatpat {

/// Continuous operation, night setback, time-clock ventilation on weekdays
/// (TCO5) or on all seven days (TCO7).
enum class ControlStrategy { COC, NSB, TCO5, TCO7, Unlabeled };

std::string_view to_string(ControlStrategy strategy);
ControlStrategy parse_strategy(std::string_view name);

struct StrategyLabel {
  ControlStrategy strategy = ControlStrategy::Unlabeled;
  std::string variant;  // e.g. "COC-A"; empty when Unlabeled
  std::string note;
  bool operator==(const StrategyLabel&) const = default;
};

/// Expert labels for one clustering, index = cluster.
struct StrategyLabeling {
  std::string fingerprint;
  std::string author;
  std::string timestamp;
  std::vector<StrategyLabel> clusters;
  bool operator==(const StrategyLabeling&) const = default;
};

/// Content hash of the centroids rounded to 1e-9, as 16 hex digits.
std::string model_fingerprint(const ClusterModel& model);

StrategyLabeling unlabeled(const ClusterModel& model);

std::string labeling_to_json(const StrategyLabeling& labeling);
/// Throws ParseError for malformed files, duplicate or missing cluster indices.
StrategyLabeling labeling_from_json(std::string_view text);

StrategyLabeling load_labeling(const std::filesystem::path& path);
/// Also throws StaleLabeling when the file was written for another model.
StrategyLabeling load_labeling(const std::filesystem::path& path, const ClusterModel& model);
/// Refuses to replace an existing file whose fingerprint differs unless `force`.
void save_labeling(const std::filesystem::path& path, const StrategyLabeling& labeling, bool force = false);

enum class Verdict { Suitable, Unsuitable, Unknown };
/// R1 multi-dwelling without continuous operation, R2 commercial/industrial
/// without time-clock operation, R3 night setback anywhere.
enum class Rule { R1, R2, R3 };

std::string_view to_string(Verdict verdict);
std::string_view to_string(Rule rule);

struct RuleOutcome {
  Verdict verdict = Verdict::Unknown;
  std::optional<Rule> rule;  // reported rule, precedence R3 > R1 > R2
  bool operator==(const RuleOutcome&) const = default;
};

RuleOutcome evaluate_rules(CustomerCategory category, ControlStrategy strategy);

struct SuitabilityFlag {
  std::string building_id;
  CustomerCategory category{};
  int cluster = 0;
  ControlStrategy strategy = ControlStrategy::Unlabeled;
  RuleOutcome outcome;
};

/// Throws StaleLabeling on fingerprint mismatch and MissingMetadata for a
/// building without a category.
std::vector<SuitabilityFlag> flag_unsuitable(const ClusterModel& model, const StrategyLabeling& labeling,
                                             const CategoryTable& categories);

void write_flags_csv(std::ostream& out, std::span<const SuitabilityFlag> flags);

/// Unsuitable counts per strategy (rows COC, NSB, TCO7, TCO5) and category.
struct UnsuitableSummary {
  std::array<std::array<int, 6>, 4> counts{};
  int strategy_total(ControlStrategy strategy) const;
  int category_total(CustomerCategory category) const;
  int total() const;
};

UnsuitableSummary summarize(std::span<const SuitabilityFlag> flags);

/// Feature cut-offs, as fractions of the winter-block range.
struct SuggestThresholds {
  /// Night (00-03) below both the evening (19-20) and the morning peak (05-08).
  double night_dip = 0.1;
  /// Weekday daytime (09-16) above the larger of night and evening.
  double day_lift = 0.2;
  /// Weekday minus weekend daytime level.
  double weekend_drop = 0.3;
};

struct PatternFeatures {
  double range = 0.0;  // z units
  double night_dip = 0.0;
  double day_lift = 0.0;
  double weekend_drop = 0.0;
};

struct LabelSuggestion {
  ControlStrategy strategy = ControlStrategy::COC;
  double confidence = 0.0;
  PatternFeatures features;
};

PatternFeatures pattern_features(std::span<const double> winter_week);

/// Heuristic pre-fill from the winter block of each centroid. Never returns
/// Unlabeled and never touches persisted labelings.
std::vector<LabelSuggestion> suggest_labels(const ClusterModel& model, const SeasonPartition& partition,
                                            const SuggestThresholds& thresholds = {});

}  // namespace heatpat
