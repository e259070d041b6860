#include "heatpat/anomaly.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace heatpat {

namespace {
constexpr double kBoundaryMargin = 1e-12;
}

bool AnomalyReport::is_flagged(const std::string& building_id) const {
  return std::any_of(flagged.begin(), flagged.end(),
                     [&](const FlaggedProfile& f) { return f.building_id == building_id; });
}

AnomalyReport detect(const ClusterModel& model, const AnomalyOptions& options) {
  AnomalyReport report;
  for (std::size_t c = 0; c < model.k; ++c) {
    const auto rows = model.members(static_cast<int>(c));
    ClusterThreshold t;
    t.cluster = static_cast<int>(c);
    t.members = rows.size();
    if (!rows.empty()) {
      double sum = 0.0;
      for (auto i : rows) sum += model.distances[i];
      t.mean = sum / static_cast<double>(rows.size());
      double ss = 0.0;
      for (auto i : rows) ss += (model.distances[i] - t.mean) * (model.distances[i] - t.mean);
      t.stddev = std::sqrt(ss / static_cast<double>(rows.size()));
    }
    t.threshold = t.mean + options.sigma_multiplier * t.stddev;
    report.clusters.push_back(t);
  }

  for (std::size_t i = 0; i < model.size(); ++i) {
    const auto& t = report.clusters[static_cast<std::size_t>(model.assignment[i])];
    if (!(t.stddev > options.eps_var)) continue;
    const double d = model.distances[i];
    const double eta = d - t.mean - options.sigma_multiplier * t.stddev;
    if (eta >= -kBoundaryMargin) {
      report.flagged.push_back({model.ids[i], t.cluster, d, t.threshold, std::max(eta, 0.0)});
    }
  }
  return report;
}

ReclusterResult remove_and_recluster(std::span<const NormalizedProfile> profiles,
                                     const AnomalyReport& report, const KShapeOptions& options,
                                     const AnomalyOptions& anomaly_options) {
  std::unordered_set<std::string> drop;
  for (const auto& f : report.flagged) drop.insert(f.building_id);

  ReclusterResult out;
  out.retained.reserve(profiles.size());
  for (const auto& p : profiles) {
    if (!drop.contains(p.building_id)) out.retained.push_back(p);
  }
  out.model = cluster(out.retained, options);
  out.audit = detect(out.model, anomaly_options);
  return out;
}

}  // namespace heatpat
