#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "heatpat/profiles.hpp"

namespace heatpat {

/// Result of k-shape clustering. Centroids are the heat load patterns; row i
/// of `ids`/`assignment`/`distances` describes the i-th clustered profile.
struct ClusterModel {
  std::size_t k = 0;
  std::uint64_t seed = 0;
  std::uint64_t init_seed = 0;  // initial partition of the winning run
  std::size_t iterations_run = 0;
  bool converged = false;
  std::vector<std::vector<double>> centroids;
  std::vector<std::string> ids;
  std::vector<int> assignment;
  std::vector<double> distances;
  /// Sum over profiles of (max NCC to own centroid)^2, one entry per iteration.
  std::vector<double> objective_history;

  std::size_t size() const { return ids.size(); }
  std::vector<std::size_t> members(int cluster) const;
  std::vector<std::size_t> cluster_sizes() const;
};

struct ShapeExtractOptions {
  double tolerance = 1e-8;
  int max_iterations = 1000;
};

/// Centroid maximising the summed squared NCC to the members after aligning
/// each member to `previous_centroid` (an all-zero previous centroid skips
/// alignment). Solved as the dominant eigenvector of the centred member Gram
/// accumulation by power iteration warm-started from the previous centroid.
/// The result is z-normalised and has non-negative correlation with the
/// previous centroid. Throws DegenerateCluster when no member carries shape.
std::vector<double> shape_extract(std::span<const std::vector<double>> members,
                                  std::span<const double> previous_centroid,
                                  const ShapeExtractOptions& options = {});

struct KShapeOptions {
  std::size_t k = 2;
  std::uint64_t seed = 0;
  int max_iter = 100;
  /// Independent random initialisations; the run with the highest final
  /// objective wins. The first run uses `seed` itself.
  int n_init = 1;
  ShapeExtractOptions extraction{};
};

/// Initial labels are a hash of (seed, building id), so the same profiles in a
/// different order start from the same partition.
ClusterModel cluster(std::span<const NormalizedProfile> profiles, const KShapeOptions& options);

/// Sum over members of (max_w NCC_w(member, centroid))^2.
double shape_objective(std::span<const std::vector<double>> members, std::span<const double> centroid);

}  // namespace heatpat
