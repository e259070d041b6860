#pragma once

#include <span>
#include <string>
#include <vector>

#include "heatpat/kshape.hpp"

namespace heatpat {

struct ClusterThreshold {
  int cluster = 0;
  std::size_t members = 0;
  double mean = 0.0;
  double stddev = 0.0;  // population
  double threshold = 0.0;
};

struct FlaggedProfile {
  std::string building_id;
  int cluster = 0;
  double distance = 0.0;
  double threshold = 0.0;
  double eta = 0.0;  // distance - threshold, >= 0
};

struct AnomalyReport {
  std::vector<ClusterThreshold> clusters;
  std::vector<FlaggedProfile> flagged;  // in model row order

  bool is_flagged(const std::string& building_id) const;
};

struct AnomalyOptions {
  double sigma_multiplier = 3.0;
  /// Clusters whose distance spread is at or below this flag nobody.
  double eps_var = 1e-12;
};

/// Per cluster, flags members with distance - (mean + a * std) >= 0. The
/// comparison admits a 1e-12 rounding margin so an exact boundary case is not
/// lost to floating point; stored eta is clamped at zero.
AnomalyReport detect(const ClusterModel& model, const AnomalyOptions& options = {});

struct ReclusterResult {
  ClusterModel model;
  AnomalyReport audit;  // recomputed on the final model, nothing removed
  std::vector<NormalizedProfile> retained;
};

/// Drops flagged profiles and clusters the rest once more with the same k and
/// seed. A single removal pass.
ReclusterResult remove_and_recluster(std::span<const NormalizedProfile> profiles,
                                     const AnomalyReport& report, const KShapeOptions& options,
                                     const AnomalyOptions& anomaly_options = {});

}  // namespace heatpat
