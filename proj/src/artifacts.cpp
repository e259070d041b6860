#include "heatpat/artifacts.hpp"

#include <json.hpp>

#include <fstream>
#include <ostream>
#include <sstream>

#include "heatpat/error.hpp"
#include "text.hpp"

namespace heatpat {

using nlohmann::json;
using detail::round_fixed;

namespace {

json rounded_array(std::span<const double> values) {
  json out = json::array();
  for (double v : values) out.push_back(round_fixed(v));
  return out;
}

json seasons_object(std::span<const double> z, const SeasonPartition& partition) {
  const auto blocks = deconcatenate(z, partition);
  json out = json::object();
  for (std::size_t s = 0; s < blocks.size(); ++s) out[partition.names[s]] = rounded_array(blocks[s]);
  return out;
}

std::vector<double> to_doubles(const json& array) {
  std::vector<double> out;
  out.reserve(array.size());
  for (const auto& v : array) out.push_back(v.get<double>());
  return out;
}

template <typename Fn>
auto parse_json(std::string_view text, std::string_view what, Fn&& fn) {
  try {
    return fn(json::parse(text));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string(what) + ": " + e.what());
  }
}

}  // namespace

void canonicalize(ClusterModel& model) {
  for (auto& c : model.centroids) {
    for (double& v : c) v = round_fixed(v);
  }
  for (double& d : model.distances) d = round_fixed(d);
  for (double& o : model.objective_history) o = round_fixed(o);
}

std::string profiles_to_json(std::span<const ProfileRecord> records, const SeasonPartition& partition) {
  json profiles = json::array();
  for (const auto& r : records) {
    json p;
    p["building_id"] = r.profile.building_id;
    p["category"] = to_string(r.category);
    p["weeks_used"] = r.profile.weeks_used;
    json seasonal = json::object();
    for (std::size_t s = 0; s < r.profile.seasonal.size(); ++s) {
      seasonal[partition.names[s]] = rounded_array(r.profile.seasonal[s]);
    }
    p["seasonal_kw"] = std::move(seasonal);
    p["z"] = rounded_array(r.normalized.z);
    profiles.push_back(std::move(p));
  }
  json doc;
  doc["partition"] = partition.id;
  doc["seasons"] = partition.names;
  doc["profiles"] = std::move(profiles);
  return doc.dump(1) + "\n";
}

std::vector<NormalizedProfile> profiles_from_json(std::string_view text, CategoryTable* categories,
                                                  SeasonPartition* partition) {
  return parse_json(text, "profiles", [&](const json& doc) {
    const auto part = SeasonPartition::from_id(doc.at("partition").get<std::string>());
    if (partition) *partition = part;
    std::vector<NormalizedProfile> out;
    for (const auto& p : doc.at("profiles")) {
      NormalizedProfile n;
      n.building_id = p.at("building_id").get<std::string>();
      n.z = to_doubles(p.at("z"));
      if (n.z.size() != part.profile_length()) {
        throw Error(ErrorCode::ParseError, "profile " + n.building_id + " has the wrong length");
      }
      if (categories) (*categories)[n.building_id] = parse_category(p.at("category").get<std::string>());
      out.push_back(std::move(n));
    }
    return out;
  });
}

std::string model_to_json(const ClusterModel& original, const SeasonPartition& partition) {
  ClusterModel model = original;
  canonicalize(model);
  const auto sizes = model.cluster_sizes();
  json centroids = json::array();
  for (std::size_t c = 0; c < model.k; ++c) {
    json entry;
    entry["cluster"] = c;
    entry["size"] = sizes[c];
    entry["seasons"] = seasons_object(model.centroids[c], partition);
    entry["z"] = rounded_array(model.centroids[c]);
    centroids.push_back(std::move(entry));
  }
  json rows = json::array();
  for (std::size_t i = 0; i < model.size(); ++i) {
    rows.push_back({{"building_id", model.ids[i]},
                    {"cluster", model.assignment[i]},
                    {"distance", round_fixed(model.distances[i])}});
  }
  json doc;
  doc["k"] = model.k;
  doc["seed"] = model.seed;
  doc["init_seed"] = model.init_seed;
  doc["iterations_run"] = model.iterations_run;
  doc["converged"] = model.converged;
  doc["fingerprint"] = model_fingerprint(model);
  doc["partition"] = partition.id;
  doc["objective_history"] = rounded_array(model.objective_history);
  doc["centroids"] = std::move(centroids);
  doc["assignment"] = std::move(rows);
  return doc.dump(1) + "\n";
}

ClusterModel model_from_json(std::string_view text) {
  return parse_json(text, "model", [](const json& doc) {
    ClusterModel m;
    m.k = doc.at("k").get<std::size_t>();
    m.seed = doc.at("seed").get<std::uint64_t>();
    m.init_seed = doc.value("init_seed", m.seed);
    m.iterations_run = doc.at("iterations_run").get<std::size_t>();
    m.converged = doc.at("converged").get<bool>();
    m.objective_history = to_doubles(doc.at("objective_history"));
    const auto& centroids = doc.at("centroids");
    if (centroids.size() != m.k) throw Error(ErrorCode::ParseError, "centroid count differs from k");
    m.centroids.resize(m.k);
    for (const auto& c : centroids) {
      const auto index = c.at("cluster").get<std::size_t>();
      if (index >= m.k) throw Error(ErrorCode::ParseError, "centroid index out of range");
      m.centroids[index] = to_doubles(c.at("z"));
    }
    for (const auto& row : doc.at("assignment")) {
      const int cluster = row.at("cluster").get<int>();
      if (cluster < 0 || static_cast<std::size_t>(cluster) >= m.k) {
        throw Error(ErrorCode::ParseError, "assignment cluster out of range");
      }
      m.ids.push_back(row.at("building_id").get<std::string>());
      m.assignment.push_back(cluster);
      m.distances.push_back(row.at("distance").get<double>());
    }
    if (doc.contains("fingerprint") && doc["fingerprint"].get<std::string>() != model_fingerprint(m)) {
      throw Error(ErrorCode::ParseError, "model fingerprint does not match its centroids");
    }
    return m;
  });
}

std::string anomaly_report_to_json(const AnomalyReport& report, const AnomalyOptions& options) {
  json clusters = json::array();
  for (const auto& c : report.clusters) {
    clusters.push_back({{"cluster", c.cluster},
                        {"members", c.members},
                        {"mean", round_fixed(c.mean)},
                        {"stddev", round_fixed(c.stddev)},
                        {"threshold", round_fixed(c.threshold)}});
  }
  json flagged = json::array();
  for (const auto& f : report.flagged) {
    flagged.push_back({{"building_id", f.building_id},
                       {"cluster", f.cluster},
                       {"distance", round_fixed(f.distance)},
                       {"threshold", round_fixed(f.threshold)},
                       {"eta", round_fixed(f.eta)}});
  }
  json doc;
  doc["sigma_multiplier"] = options.sigma_multiplier;
  doc["eps_var"] = options.eps_var;
  doc["clusters"] = std::move(clusters);
  doc["flagged"] = std::move(flagged);
  return doc.dump(1) + "\n";
}

AnomalyReport anomaly_report_from_json(std::string_view text) {
  return parse_json(text, "anomaly report", [](const json& doc) {
    AnomalyReport r;
    for (const auto& c : doc.at("clusters")) {
      r.clusters.push_back({c.at("cluster").get<int>(), c.at("members").get<std::size_t>(),
                            c.at("mean").get<double>(), c.at("stddev").get<double>(),
                            c.at("threshold").get<double>()});
    }
    for (const auto& f : doc.at("flagged")) {
      r.flagged.push_back({f.at("building_id").get<std::string>(), f.at("cluster").get<int>(),
                           f.at("distance").get<double>(), f.at("threshold").get<double>(),
                           f.at("eta").get<double>()});
    }
    return r;
  });
}

void write_anomalies_csv(std::ostream& out, const AnomalyReport& report) {
  out << "building_id,cluster,distance,threshold,eta\n";
  for (const auto& f : report.flagged) {
    out << f.building_id << ',' << f.cluster << ',' << detail::format_number(round_fixed(f.distance)) << ','
        << detail::format_number(round_fixed(f.threshold)) << ',' << detail::format_number(round_fixed(f.eta))
        << '\n';
  }
}

std::string sweep_to_json(const SilhouetteSweep& sweep) {
  json rows = json::array();
  for (const auto& r : sweep.rows) {
    rows.push_back({{"k", r.k},
                    {"mean_silhouette", round_fixed(r.mean_silhouette)},
                    {"advisory", silhouette_advisory(r.mean_silhouette)},
                    {"iterations", r.iterations},
                    {"seed", r.seed}});
  }
  json doc;
  doc["recommended_k"] = sweep.recommended_k;
  doc["rows"] = std::move(rows);
  return doc.dump(1) + "\n";
}

void write_sweep_csv(std::ostream& out, const SilhouetteSweep& sweep) {
  out << "k,mean_silhouette,iterations\n";
  for (const auto& r : sweep.rows) {
    out << r.k << ',' << detail::format_number(round_fixed(r.mean_silhouette)) << ',' << r.iterations << '\n';
  }
}

std::string suggestions_to_json(std::span<const LabelSuggestion> suggestions) {
  json out = json::array();
  for (std::size_t c = 0; c < suggestions.size(); ++c) {
    const auto& s = suggestions[c];
    out.push_back({{"cluster", c},
                   {"strategy", to_string(s.strategy)},
                   {"confidence", round_fixed(s.confidence)},
                   {"features",
                    {{"range", round_fixed(s.features.range)},
                     {"night_dip", round_fixed(s.features.night_dip)},
                     {"day_lift", round_fixed(s.features.day_lift)},
                     {"weekend_drop", round_fixed(s.features.weekend_drop)}}}});
  }
  return json{{"suggestions", std::move(out)}}.dump(1) + "\n";
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::MissingArtifact, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw Error(ErrorCode::InputError, "cannot write " + tmp.string());
    out << text;
    if (!out) throw Error(ErrorCode::InputError, "write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace heatpat
