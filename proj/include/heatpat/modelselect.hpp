#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "heatpat/kshape.hpp"

namespace heatpat {

/// Dense symmetric SBD matrix over a fixed profile set.
class DistanceMatrix {
 public:
  static DistanceMatrix compute(std::span<const NormalizedProfile> profiles);
  /// Rows and columns restricted to `rows`, in that order.
  DistanceMatrix subset(std::span<const std::size_t> rows) const;

  std::size_t size() const { return n_; }
  double operator()(std::size_t i, std::size_t j) const { return values_[i * n_ + j]; }

 private:
  std::size_t n_ = 0;
  std::vector<double> values_;
};

/// Mean silhouette for labels in [0, k). Singletons score 0.
double mean_silhouette(std::span<const int> labels, std::size_t k, const DistanceMatrix& distances);

/// `profiles` must be in the model's row order. Throws SilhouetteUndefined for k < 2.
double mean_silhouette(const ClusterModel& model, std::span<const NormalizedProfile> profiles);

/// "excellent" above 0.7, "reasonable" in [0.5, 0.7], "weak" below.
std::string_view silhouette_advisory(double mean_silhouette);

struct SweepRow {
  std::size_t k = 0;
  double mean_silhouette = 0.0;
  std::size_t iterations = 0;
  std::uint64_t seed = 0;  // seed of the retained run
};

struct SilhouetteSweep {
  std::vector<SweepRow> rows;
  std::size_t recommended_k = 0;
};

struct SweepOptions {
  std::size_t k_min = 2;
  std::size_t k_max = 8;
  std::uint64_t seed = 0;
  int max_iter = 100;
  /// Runs per k with seeds seed, seed+1, ...; the best silhouette is kept.
  int restarts = 1;
  /// Passed through to every k-shape run.
  int n_init = 1;
};

/// Clusters once per k and scores it; recommended_k is the argmax, ties to
/// the smaller k.
SilhouetteSweep sweep(std::span<const NormalizedProfile> profiles, const SweepOptions& options);
/// Same, reusing a distance matrix over `profiles`.
SilhouetteSweep sweep(std::span<const NormalizedProfile> profiles, const SweepOptions& options,
                      const DistanceMatrix& distances);

}  // namespace heatpat
