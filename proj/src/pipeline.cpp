#include "heatpat/pipeline.hpp"

#include <json.hpp>

#include <algorithm>
#include <sstream>
#include <unordered_map>

#include "heatpat/error.hpp"
#include "text.hpp"

namespace heatpat {

using nlohmann::json;

namespace {

[[noreturn]] void bad_config(const std::string& what) { throw Error(ErrorCode::InvalidConfig, what); }

void reject_unknown_keys(const json& object, std::initializer_list<std::string_view> known, std::string_view where) {
  for (const auto& [key, _] : object.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      bad_config("unknown key '" + key + "' in " + std::string(where));
    }
  }
}

json cleaning_to_json(const CleaningParams& c) {
  json j;
  j["window_hours"] = c.window_hours;
  j["eps_mad"] = c.eps_mad;
  j["mad_multiplier"] = c.mad_multiplier;
  j["max_gap_hours"] = c.max_gap_hours;
  j["max_total_missing_hours"] = c.max_total_missing_hours;
  j["stuck_run_hours"] = c.stuck_run_hours;
  return j;
}

CleaningParams cleaning_from_json(const json& j) {
  reject_unknown_keys(j,
                      {"window_hours", "eps_mad", "mad_multiplier", "max_gap_hours", "max_total_missing_hours",
                       "stuck_run_hours"},
                      "cleaning");
  CleaningParams c;
  c.window_hours = j.value("window_hours", c.window_hours);
  c.eps_mad = j.value("eps_mad", c.eps_mad);
  c.mad_multiplier = j.value("mad_multiplier", c.mad_multiplier);
  c.max_gap_hours = j.value("max_gap_hours", c.max_gap_hours);
  c.max_total_missing_hours = j.value("max_total_missing_hours", c.max_total_missing_hours);
  c.stuck_run_hours = j.value("stuck_run_hours", c.stuck_run_hours);
  return c;
}

json optional_number(const std::optional<double>& v) {
  return v ? json(detail::round_fixed(*v)) : json(nullptr);
}

}  // namespace

void PipelineConfig::validate() const {
  (void)SeasonPartition::from_id(partition);
  if (!k && !sweep) bad_config("either k or sweep must be given");
  if (k && *k < 1) bad_config("k must be at least 1");
  if (sweep && (sweep->k_min < 2 || sweep->k_min > sweep->k_max)) bad_config("sweep needs 2 <= k_min <= k_max");
  if (max_iter < 1) bad_config("max_iter must be at least 1");
  if (n_init < 1) bad_config("n_init must be at least 1");
  if (restarts < 1) bad_config("restarts must be at least 1");
  if (!(sigma_multiplier > 0.0)) bad_config("sigma_multiplier must be positive");
  const auto& c = cleaning;
  if (c.window_hours < 3 || c.window_hours % 2 == 0) bad_config("cleaning.window_hours must be odd and >= 3");
  if (!(c.eps_mad > 0.0)) bad_config("cleaning.eps_mad must be positive");
  if (!(c.mad_multiplier > 0.0)) bad_config("cleaning.mad_multiplier must be positive");
  if (c.max_gap_hours < 0) bad_config("cleaning.max_gap_hours must be non-negative");
  if (c.max_total_missing_hours < 0) bad_config("cleaning.max_total_missing_hours must be non-negative");
  if (c.stuck_run_hours < 2) bad_config("cleaning.stuck_run_hours must be at least 2");
}

bool PipelineConfig::operator==(const PipelineConfig& o) const {
  const auto& a = cleaning;
  const auto& b = o.cleaning;
  return inputs == o.inputs && metadata == o.metadata && partition == o.partition && k == o.k &&
         sweep == o.sweep && seed == o.seed && max_iter == o.max_iter && n_init == o.n_init &&
         restarts == o.restarts && sigma_multiplier == o.sigma_multiplier && output_dir == o.output_dir &&
         a.window_hours == b.window_hours && a.eps_mad == b.eps_mad && a.mad_multiplier == b.mad_multiplier &&
         a.max_gap_hours == b.max_gap_hours && a.max_total_missing_hours == b.max_total_missing_hours &&
         a.stuck_run_hours == b.stuck_run_hours;
}

std::string config_to_json(const PipelineConfig& c) {
  json j;
  json inputs = json::array();
  for (const auto& p : c.inputs) inputs.push_back(p.string());
  j["inputs"] = std::move(inputs);
  j["metadata"] = c.metadata ? json(c.metadata->string()) : json(nullptr);
  j["partition"] = c.partition;
  j["k"] = c.k ? json(*c.k) : json(nullptr);
  j["sweep"] = c.sweep ? json{{"k_min", c.sweep->k_min}, {"k_max", c.sweep->k_max}} : json(nullptr);
  j["seed"] = c.seed;
  j["max_iter"] = c.max_iter;
  j["n_init"] = c.n_init;
  j["restarts"] = c.restarts;
  j["sigma_multiplier"] = c.sigma_multiplier;
  j["cleaning"] = cleaning_to_json(c.cleaning);
  j["output_dir"] = c.output_dir.string();
  return j.dump(2) + "\n";
}

PipelineConfig config_from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) bad_config("config must be a JSON object");
  reject_unknown_keys(j,
                      {"inputs", "metadata", "partition", "k", "sweep", "seed", "max_iter", "n_init", "restarts",
                       "sigma_multiplier", "cleaning", "output_dir"},
                      "config");
  PipelineConfig c;
  try {
    if (j.contains("inputs")) {
      for (const auto& p : j["inputs"]) c.inputs.emplace_back(p.get<std::string>());
    }
    if (j.contains("metadata") && !j["metadata"].is_null()) c.metadata = j["metadata"].get<std::string>();
    c.partition = j.value("partition", c.partition);
    if (j.contains("k") && !j["k"].is_null()) {
      if (!j["k"].is_number_unsigned()) bad_config("k must be a positive integer");
      c.k = j["k"].get<std::size_t>();
    }
    if (j.contains("sweep") && !j["sweep"].is_null()) {
      const auto& s = j["sweep"];
      reject_unknown_keys(s, {"k_min", "k_max"}, "sweep");
      SweepRange r;
      r.k_min = s.value("k_min", r.k_min);
      r.k_max = s.value("k_max", r.k_max);
      c.sweep = r;
    }
    c.seed = j.value("seed", c.seed);
    c.max_iter = j.value("max_iter", c.max_iter);
    c.n_init = j.value("n_init", c.n_init);
    c.restarts = j.value("restarts", c.restarts);
    c.sigma_multiplier = j.value("sigma_multiplier", c.sigma_multiplier);
    if (j.contains("cleaning")) c.cleaning = cleaning_from_json(j["cleaning"]);
    if (j.contains("output_dir")) c.output_dir = j["output_dir"].get<std::string>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("config field has the wrong type: ") + e.what());
  }
  return c;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  return config_from_json(read_text_file(path));
}

bool StageCounts::consistent() const {
  std::size_t by_reason = 0;
  for (const auto& [_, n] : rejected_by_reason) by_reason += n;
  return by_reason == rejected && ingested == rejected + profiled && profiled == degenerate + clustered &&
         clustered == abnormal + final_clustered;
}

std::string manifest_to_json(const RunManifest& m) {
  json counts;
  counts["ingested"] = m.counts.ingested;
  counts["rejected"] = m.counts.rejected;
  counts["rejected_by_reason"] = m.counts.rejected_by_reason;
  counts["profiled"] = m.counts.profiled;
  counts["degenerate"] = m.counts.degenerate;
  counts["clustered"] = m.counts.clustered;
  counts["abnormal"] = m.counts.abnormal;
  counts["final_clustered"] = m.counts.final_clustered;
  counts["repaired_readings"] = m.counts.repaired_readings;
  json issues = json::array();
  for (const auto& i : m.issues) {
    issues.push_back({{"building_id", i.building_id}, {"stage", i.stage}, {"code", i.code}, {"message", i.message}});
  }
  json j;
  j["tool_version"] = m.tool_version;
  j["config"] = json::parse(m.config_json);
  j["counts"] = std::move(counts);
  j["k"] = m.k;
  j["k_source"] = m.k_source;
  j["silhouette_initial"] = optional_number(m.silhouette_initial);
  j["silhouette_final"] = optional_number(m.silhouette_final);
  j["fingerprint"] = m.fingerprint;
  j["warnings"] = m.warnings;
  j["issues"] = std::move(issues);
  return j.dump(2) + "\n";
}

RunManifest manifest_from_json(std::string_view text) {
  try {
    const json j = json::parse(text);
    RunManifest m;
    m.tool_version = j.at("tool_version").get<std::string>();
    m.config_json = j.at("config").dump(2) + "\n";
    const auto& c = j.at("counts");
    m.counts.ingested = c.at("ingested").get<std::size_t>();
    m.counts.rejected = c.at("rejected").get<std::size_t>();
    m.counts.rejected_by_reason = c.at("rejected_by_reason").get<std::map<std::string, std::size_t>>();
    m.counts.profiled = c.at("profiled").get<std::size_t>();
    m.counts.degenerate = c.at("degenerate").get<std::size_t>();
    m.counts.clustered = c.at("clustered").get<std::size_t>();
    m.counts.abnormal = c.at("abnormal").get<std::size_t>();
    m.counts.final_clustered = c.at("final_clustered").get<std::size_t>();
    m.counts.repaired_readings = c.at("repaired_readings").get<std::size_t>();
    m.k = j.at("k").get<std::size_t>();
    m.k_source = j.at("k_source").get<std::string>();
    if (!j.at("silhouette_initial").is_null()) m.silhouette_initial = j["silhouette_initial"].get<double>();
    if (!j.at("silhouette_final").is_null()) m.silhouette_final = j["silhouette_final"].get<double>();
    m.fingerprint = j.at("fingerprint").get<std::string>();
    m.warnings = j.at("warnings").get<std::vector<std::string>>();
    for (const auto& i : j.at("issues")) {
      m.issues.push_back({i.at("building_id").get<std::string>(), i.at("stage").get<std::string>(),
                          i.at("code").get<std::string>(), i.at("message").get<std::string>()});
    }
    return m;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("manifest: ") + e.what());
  }
}

PipelineOutputs run_on_series(std::vector<RawMeterSeries> series, const PipelineConfig& config,
                              std::vector<std::string> ingest_warnings) {
  config.validate();
  PipelineOutputs out;
  out.partition = SeasonPartition::from_id(config.partition);
  auto& manifest = out.manifest;
  auto& counts = manifest.counts;
  manifest.config_json = config_to_json(config);
  manifest.warnings = std::move(ingest_warnings);

  // DataCleaning, ExtractHeatLoadProfiles, ZNormalize
  counts.ingested = series.size();
  for (auto& s : series) {
    const auto outcome = clean(s, config.cleaning);
    out.screening.push_back({s.building_id, outcome.verdict});
    if (!outcome.verdict.accepted()) {
      ++counts.rejected;
      ++counts.rejected_by_reason[std::string(to_string(*outcome.verdict.reason))];
      continue;
    }
    ++counts.profiled;
    counts.repaired_readings += static_cast<std::size_t>(outcome.verdict.repaired_count);
    try {
      ProfileRecord record;
      record.profile = extract_profile(*outcome.cleaned, out.partition);
      record.normalized = normalize(record.profile, out.partition);
      record.category = s.category;
      out.profiles.push_back(std::move(record));
    } catch (const Error& e) {
      ++counts.degenerate;
      manifest.issues.push_back({s.building_id, "profile", std::string(to_string(e.code())), e.what()});
    }
  }
  counts.clustered = out.profiles.size();

  std::vector<NormalizedProfile> normalized;
  normalized.reserve(out.profiles.size());
  for (const auto& r : out.profiles) normalized.push_back(r.normalized);

  std::optional<DistanceMatrix> distances;
  auto all_distances = [&]() -> const DistanceMatrix& {
    if (!distances) distances = DistanceMatrix::compute(normalized);
    return *distances;
  };

  if (config.sweep) {
    SweepOptions so;
    so.k_min = config.sweep->k_min;
    so.k_max = config.sweep->k_max;
    so.seed = config.seed;
    so.max_iter = config.max_iter;
    so.restarts = config.restarts;
    so.n_init = config.n_init;
    out.sweep = sweep(normalized, so, all_distances());
  }
  if (config.k) {
    manifest.k = *config.k;
    manifest.k_source = "config";
  } else {
    manifest.k = out.sweep->recommended_k;
    manifest.k_source = "sweep";
  }

  // KShape
  KShapeOptions ko;
  ko.k = manifest.k;
  ko.seed = config.seed;
  ko.max_iter = config.max_iter;
  ko.n_init = config.n_init;
  out.initial = cluster(normalized, ko);
  canonicalize(out.initial);

  // DetectAbnormalProfiles
  AnomalyOptions ao;
  ao.sigma_multiplier = config.sigma_multiplier;
  out.initial_report = detect(out.initial, ao);
  counts.abnormal = out.initial_report.flagged.size();

  // RemoveAbnormalProfiles, KShape, GetCentroids
  std::vector<std::size_t> kept_rows;
  std::vector<NormalizedProfile> retained;
  for (std::size_t i = 0; i < normalized.size(); ++i) {
    if (!out.initial_report.is_flagged(normalized[i].building_id)) {
      kept_rows.push_back(i);
      retained.push_back(normalized[i]);
    }
  }
  counts.final_clustered = retained.size();
  out.final_model = cluster(retained, ko);
  canonicalize(out.final_model);
  out.final_report = detect(out.final_model, ao);
  manifest.fingerprint = model_fingerprint(out.final_model);

  if (manifest.k >= 2) {
    manifest.silhouette_initial = mean_silhouette(out.initial.assignment, manifest.k, all_distances());
    if (retained.size() > 1) {
      manifest.silhouette_final =
          mean_silhouette(out.final_model.assignment, manifest.k, all_distances().subset(kept_rows));
    }
  }

  CategoryTable categories;
  for (const auto& r : out.profiles) categories[r.profile.building_id] = r.category;
  out.labeling = unlabeled(out.final_model);
  out.flags = flag_unsuitable(out.final_model, out.labeling, categories);
  out.suggestions = suggest_labels(out.final_model, out.partition);
  return out;
}

std::string flags_csv(std::span<const SuitabilityFlag> flags) {
  std::ostringstream ss;
  write_flags_csv(ss, flags);
  return ss.str();
}

void write_store(PipelineOutputs& outputs, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const auto put = [&dir](std::string_view name, std::string_view text) {
    write_text_file(dir / std::string(name), text);
  };

  const auto labeling_path = dir / std::string(store::kLabeling);
  if (fs::exists(labeling_path)) {
    try {
      auto existing = load_labeling(labeling_path);
      if (existing.fingerprint == outputs.manifest.fingerprint &&
          existing.clusters.size() == outputs.final_model.k) {
        CategoryTable categories;
        for (const auto& r : outputs.profiles) categories[r.profile.building_id] = r.category;
        outputs.flags = flag_unsuitable(outputs.final_model, existing, categories);
        outputs.labeling = std::move(existing);
      } else {
        fs::rename(labeling_path, dir / ("labeling." + existing.fingerprint + ".json"));
      }
    } catch (const Error&) {
      fs::rename(labeling_path, dir / "labeling.unreadable.json");
    }
  }

  // Sweep files from an earlier run would no longer describe this store.
  if (!outputs.sweep) {
    fs::remove(dir / std::string(store::kSweepCsv));
    fs::remove(dir / std::string(store::kSweepJson));
  }

  std::ostringstream screening;
  write_screening_report(screening, outputs.screening);
  std::ostringstream anomalies;
  write_anomalies_csv(anomalies, outputs.initial_report);
  AnomalyOptions ao;
  ao.sigma_multiplier = config_from_json(outputs.manifest.config_json).sigma_multiplier;

  put(store::kConfig, outputs.manifest.config_json);
  put(store::kScreening, screening.str());
  put(store::kProfiles, profiles_to_json(outputs.profiles, outputs.partition));
  put(store::kModelInitial, model_to_json(outputs.initial, outputs.partition));
  put(store::kAnomalyReport, anomaly_report_to_json(outputs.initial_report, ao));
  put(store::kAnomalies, anomalies.str());
  put(store::kModelFinal, model_to_json(outputs.final_model, outputs.partition));
  put(store::kAnomalyReportFinal, anomaly_report_to_json(outputs.final_report, ao));
  if (outputs.sweep) {
    std::ostringstream csv;
    write_sweep_csv(csv, *outputs.sweep);
    put(store::kSweepCsv, csv.str());
    put(store::kSweepJson, sweep_to_json(*outputs.sweep));
  }
  put(store::kLabeling, labeling_to_json(outputs.labeling));
  put(store::kFlags, flags_csv(outputs.flags));
  put(store::kSuggestions, suggestions_to_json(outputs.suggestions));
  put(store::kManifest, manifest_to_json(outputs.manifest));
}

PipelineOutputs run(const PipelineConfig& config) {
  config.validate();
  if (config.inputs.empty()) throw Error(ErrorCode::InvalidConfig, "no input files");
  std::optional<CategoryTable> metadata;
  if (config.metadata) metadata = read_metadata_csv(*config.metadata);
  std::vector<RawMeterSeries> series;
  std::vector<std::string> warnings;
  for (const auto& path : config.inputs) {
    auto ingested = read_readings_csv(path, metadata ? &*metadata : nullptr);
    for (auto& s : ingested.series) series.push_back(std::move(s));
    for (auto& w : ingested.warnings) warnings.push_back(path.filename().string() + ": " + w);
  }
  std::unordered_map<std::string, int> seen;
  for (const auto& s : series) {
    if (++seen[s.building_id] > 1) {
      throw Error(ErrorCode::InputError, "building " + s.building_id + " appears in more than one input");
    }
  }
  auto outputs = run_on_series(std::move(series), config, std::move(warnings));
  write_store(outputs, config.output_dir);
  return outputs;
}

}  // namespace heatpat
