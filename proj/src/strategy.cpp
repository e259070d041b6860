#include "heatpat/strategy.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "heatpat/error.hpp"

namespace heatpat {

using nlohmann::json;

namespace {

constexpr std::array<std::string_view, 5> kStrategyNames = {"COC", "NSB", "TCO5", "TCO7", "Unlabeled"};

// Row order of the unsuitable summary.
int summary_row(ControlStrategy s) {
  switch (s) {
    case ControlStrategy::COC: return 0;
    case ControlStrategy::NSB: return 1;
    case ControlStrategy::TCO7: return 2;
    case ControlStrategy::TCO5: return 3;
    case ControlStrategy::Unlabeled: return -1;
  }
  return -1;
}

double mean_of(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

std::string_view to_string(ControlStrategy strategy) {
  return kStrategyNames[static_cast<std::size_t>(strategy)];
}

ControlStrategy parse_strategy(std::string_view name) {
  for (std::size_t i = 0; i < kStrategyNames.size(); ++i) {
    if (kStrategyNames[i] == name) return static_cast<ControlStrategy>(i);
  }
  throw Error(ErrorCode::ParseError, "unknown control strategy '" + std::string(name) + "'");
}

std::string_view to_string(Verdict verdict) {
  switch (verdict) {
    case Verdict::Suitable: return "Suitable";
    case Verdict::Unsuitable: return "Unsuitable";
    case Verdict::Unknown: return "Unknown";
  }
  return "?";
}

std::string_view to_string(Rule rule) {
  switch (rule) {
    case Rule::R1: return "R1";
    case Rule::R2: return "R2";
    case Rule::R3: return "R3";
  }
  return "?";
}

std::string model_fingerprint(const ClusterModel& model) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](std::uint64_t word) {
    for (int b = 0; b < 8; ++b) {
      h ^= (word >> (8 * b)) & 0xffU;
      h *= 0x100000001b3ULL;
    }
  };
  mix(model.centroids.size());
  for (const auto& c : model.centroids) {
    mix(c.size());
    for (double v : c) mix(static_cast<std::uint64_t>(std::llround(v * 1e9)));
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

StrategyLabeling unlabeled(const ClusterModel& model) {
  StrategyLabeling l;
  l.fingerprint = model_fingerprint(model);
  l.clusters.assign(model.k, StrategyLabel{});
  return l;
}

std::string labeling_to_json(const StrategyLabeling& labeling) {
  json clusters = json::array();
  for (std::size_t c = 0; c < labeling.clusters.size(); ++c) {
    const auto& l = labeling.clusters[c];
    json entry;
    entry["cluster"] = c;
    entry["strategy"] = to_string(l.strategy);
    entry["variant"] = l.variant;
    entry["note"] = l.note;
    clusters.push_back(std::move(entry));
  }
  json doc;
  doc["fingerprint"] = labeling.fingerprint;
  doc["author"] = labeling.author;
  doc["timestamp"] = labeling.timestamp;
  doc["clusters"] = std::move(clusters);
  return doc.dump(2) + "\n";
}

StrategyLabeling labeling_from_json(std::string_view text) {
  StrategyLabeling out;
  try {
    const json doc = json::parse(text);
    out.fingerprint = doc.at("fingerprint").get<std::string>();
    out.author = doc.value("author", "");
    out.timestamp = doc.value("timestamp", "");
    const auto& clusters = doc.at("clusters");
    if (!clusters.is_array()) throw Error(ErrorCode::ParseError, "clusters must be an array");
    std::vector<std::optional<StrategyLabel>> slots(clusters.size());
    for (const auto& entry : clusters) {
      const auto index = entry.at("cluster").get<long long>();
      if (index < 0 || static_cast<std::size_t>(index) >= slots.size()) {
        throw Error(ErrorCode::ParseError, "cluster index " + std::to_string(index) + " out of range");
      }
      auto& slot = slots[static_cast<std::size_t>(index)];
      if (slot) throw Error(ErrorCode::ParseError, "duplicate cluster index " + std::to_string(index));
      StrategyLabel label;
      label.strategy = parse_strategy(entry.at("strategy").get<std::string>());
      label.variant = entry.value("variant", "");
      label.note = entry.value("note", "");
      if (label.strategy == ControlStrategy::Unlabeled && !label.variant.empty()) {
        throw Error(ErrorCode::ParseError, "unlabeled cluster cannot carry a variant");
      }
      slot = std::move(label);
    }
    // every index in [0, size) filled: duplicates are rejected above and the
    // count equals the size, so none can be missing
    for (auto& s : slots) out.clusters.push_back(std::move(*s));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
  return out;
}

StrategyLabeling load_labeling(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::MissingArtifact, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return labeling_from_json(ss.str());
}

StrategyLabeling load_labeling(const std::filesystem::path& path, const ClusterModel& model) {
  auto labeling = load_labeling(path);
  const auto expected = model_fingerprint(model);
  if (labeling.fingerprint != expected) {
    throw Error(ErrorCode::StaleLabeling,
                "labeling " + labeling.fingerprint + " does not match model " + expected);
  }
  if (labeling.clusters.size() != model.k) {
    throw Error(ErrorCode::ParseError, "labeling covers " + std::to_string(labeling.clusters.size()) +
                                           " clusters, model has " + std::to_string(model.k));
  }
  return labeling;
}

void save_labeling(const std::filesystem::path& path, const StrategyLabeling& labeling, bool force) {
  if (!force && std::filesystem::exists(path)) {
    const auto existing = load_labeling(path);
    if (existing.fingerprint != labeling.fingerprint) {
      throw Error(ErrorCode::StaleLabeling, "existing labeling at " + path.string() +
                                                " belongs to model " + existing.fingerprint);
    }
  }
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp);
    if (!out) throw Error(ErrorCode::InputError, "cannot write " + tmp.string());
    out << labeling_to_json(labeling);
  }
  std::filesystem::rename(tmp, path);
}

RuleOutcome evaluate_rules(CustomerCategory category, ControlStrategy strategy) {
  if (strategy == ControlStrategy::Unlabeled) return {Verdict::Unknown, std::nullopt};
  if (strategy == ControlStrategy::NSB) return {Verdict::Unsuitable, Rule::R3};
  if (category == CustomerCategory::MultiDwelling && strategy != ControlStrategy::COC) {
    return {Verdict::Unsuitable, Rule::R1};
  }
  const bool needs_time_clock =
      category == CustomerCategory::Commercial || category == CustomerCategory::Industrial;
  if (needs_time_clock && strategy != ControlStrategy::TCO5 && strategy != ControlStrategy::TCO7) {
    return {Verdict::Unsuitable, Rule::R2};
  }
  return {Verdict::Suitable, std::nullopt};
}

std::vector<SuitabilityFlag> flag_unsuitable(const ClusterModel& model, const StrategyLabeling& labeling,
                                             const CategoryTable& categories) {
  const auto expected = model_fingerprint(model);
  if (labeling.fingerprint != expected) {
    throw Error(ErrorCode::StaleLabeling,
                "labeling " + labeling.fingerprint + " does not match model " + expected);
  }
  if (labeling.clusters.size() != model.k) {
    throw Error(ErrorCode::StaleLabeling, "labeling cluster count differs from model");
  }
  std::vector<SuitabilityFlag> flags;
  flags.reserve(model.size());
  for (std::size_t i = 0; i < model.size(); ++i) {
    const auto it = categories.find(model.ids[i]);
    if (it == categories.end()) {
      throw Error(ErrorCode::MissingMetadata, "no category for building " + model.ids[i]);
    }
    SuitabilityFlag f;
    f.building_id = model.ids[i];
    f.category = it->second;
    f.cluster = model.assignment[i];
    f.strategy = labeling.clusters[static_cast<std::size_t>(f.cluster)].strategy;
    f.outcome = evaluate_rules(f.category, f.strategy);
    flags.push_back(std::move(f));
  }
  return flags;
}

void write_flags_csv(std::ostream& out, std::span<const SuitabilityFlag> flags) {
  out << "building_id,category,cluster,strategy,verdict,rule\n";
  for (const auto& f : flags) {
    out << f.building_id << ',' << to_string(f.category) << ',' << f.cluster << ','
        << to_string(f.strategy) << ',' << to_string(f.outcome.verdict) << ','
        << (f.outcome.rule ? to_string(*f.outcome.rule) : std::string_view{}) << '\n';
  }
}

int UnsuitableSummary::strategy_total(ControlStrategy strategy) const {
  const int row = summary_row(strategy);
  if (row < 0) return 0;
  const auto& r = counts[static_cast<std::size_t>(row)];
  return std::accumulate(r.begin(), r.end(), 0);
}

int UnsuitableSummary::category_total(CustomerCategory category) const {
  int total = 0;
  for (const auto& r : counts) total += r[static_cast<std::size_t>(category)];
  return total;
}

int UnsuitableSummary::total() const {
  int total = 0;
  for (const auto& r : counts) total += std::accumulate(r.begin(), r.end(), 0);
  return total;
}

UnsuitableSummary summarize(std::span<const SuitabilityFlag> flags) {
  UnsuitableSummary s;
  for (const auto& f : flags) {
    if (f.outcome.verdict != Verdict::Unsuitable) continue;
    const int row = summary_row(f.strategy);
    if (row >= 0) ++s.counts[static_cast<std::size_t>(row)][static_cast<std::size_t>(f.category)];
  }
  return s;
}

PatternFeatures pattern_features(std::span<const double> week) {
  if (week.size() != kHoursPerWeek) throw Error(ErrorCode::ShapeError, "expected a 168-hour block");
  // hour-of-day means over weekdays (Mon-Fri) and the weekend
  std::array<double, 24> weekday{};
  std::array<double, 24> weekend{};
  for (std::size_t d = 0; d < 7; ++d) {
    for (std::size_t h = 0; h < 24; ++h) {
      const double v = week[d * 24 + h];
      if (d < 5) weekday[h] += v / 5.0;
      else weekend[h] += v / 2.0;
    }
  }
  const auto [lo, hi] = std::minmax_element(week.begin(), week.end());
  PatternFeatures f;
  f.range = *hi - *lo;
  if (f.range <= 0.0) return f;

  const std::span<const double> wd(weekday);
  const std::span<const double> we(weekend);
  const double night = mean_of(wd.subspan(0, 4));
  const double morning = *std::max_element(weekday.begin() + 5, weekday.begin() + 9);
  const double day = mean_of(wd.subspan(9, 8));
  const double evening = mean_of(wd.subspan(19, 2));

  f.night_dip = (std::min(evening, morning) - night) / f.range;
  f.day_lift = (day - std::max(night, evening)) / f.range;
  f.weekend_drop = (day - mean_of(we.subspan(9, 8))) / f.range;
  return f;
}

namespace {

// 0.5 at the cut-off, approaching 1 at three times the cut-off.
double confidence_above(double value, double cutoff) {
  return std::clamp(0.5 + 0.25 * (value - cutoff) / cutoff, 0.5, 1.0);
}

}  // namespace

std::vector<LabelSuggestion> suggest_labels(const ClusterModel& model, const SeasonPartition& partition,
                                            const SuggestThresholds& t) {
  std::vector<LabelSuggestion> out;
  out.reserve(model.k);
  for (const auto& centroid : model.centroids) {
    const auto blocks = deconcatenate(centroid, partition);
    LabelSuggestion s;
    s.features = pattern_features(blocks.front());
    const auto& f = s.features;
    if (f.night_dip >= t.night_dip) {
      s.strategy = ControlStrategy::NSB;
      s.confidence = confidence_above(f.night_dip, t.night_dip);
    } else if (f.day_lift >= t.day_lift) {
      const bool weekdays_only = f.weekend_drop >= t.weekend_drop;
      s.strategy = weekdays_only ? ControlStrategy::TCO5 : ControlStrategy::TCO7;
      s.confidence = std::min(confidence_above(f.day_lift, t.day_lift),
                              weekdays_only ? confidence_above(f.weekend_drop, t.weekend_drop)
                                            : confidence_above(2.0 * t.weekend_drop - f.weekend_drop, t.weekend_drop));
    } else {
      s.strategy = ControlStrategy::COC;
      s.confidence = confidence_above(2.0 * t.day_lift - f.day_lift, t.day_lift);
    }
    out.push_back(s);
  }
  return out;
}

}  // namespace heatpat
