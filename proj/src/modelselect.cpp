#include "heatpat/modelselect.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "heatpat/error.hpp"
#include "heatpat/sbd.hpp"

namespace heatpat {

DistanceMatrix DistanceMatrix::compute(std::span<const NormalizedProfile> profiles) {
  DistanceMatrix dm;
  dm.n_ = profiles.size();
  dm.values_.assign(dm.n_ * dm.n_, 0.0);
  if (dm.n_ == 0) return dm;

  SbdEngine engine(profiles.front().z.size());
  std::vector<SbdEngine::Spectrum> spectra;
  spectra.reserve(dm.n_);
  for (const auto& p : profiles) spectra.push_back(engine.transform(p.z));
  for (std::size_t i = 0; i < dm.n_; ++i) {
    for (std::size_t j = i + 1; j < dm.n_; ++j) {
      const double d = engine.sbd(spectra[i], spectra[j]).distance;
      dm.values_[i * dm.n_ + j] = d;
      dm.values_[j * dm.n_ + i] = d;
    }
  }
  return dm;
}

DistanceMatrix DistanceMatrix::subset(std::span<const std::size_t> rows) const {
  DistanceMatrix dm;
  dm.n_ = rows.size();
  dm.values_.resize(dm.n_ * dm.n_);
  for (std::size_t a = 0; a < dm.n_; ++a) {
    for (std::size_t b = 0; b < dm.n_; ++b) dm.values_[a * dm.n_ + b] = (*this)(rows[a], rows[b]);
  }
  return dm;
}

double mean_silhouette(std::span<const int> labels, std::size_t k, const DistanceMatrix& distances) {
  if (k < 2) throw Error(ErrorCode::SilhouetteUndefined, "silhouette needs at least two clusters");
  const std::size_t n = labels.size();
  if (distances.size() != n) throw Error(ErrorCode::ShapeError, "label count does not match distances");
  if (n == 0) return 0.0;

  std::vector<std::size_t> sizes(k, 0);
  for (int c : labels) ++sizes[static_cast<std::size_t>(c)];

  std::vector<double> sums(k);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto own = static_cast<std::size_t>(labels[i]);
    if (sizes[own] <= 1) continue;  // s(i) = 0
    std::fill(sums.begin(), sums.end(), 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) sums[static_cast<std::size_t>(labels[j])] += distances(i, j);
    }
    const double a = sums[own] / static_cast<double>(sizes[own] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < k; ++c) {
      if (c == own || sizes[c] == 0) continue;
      b = std::min(b, sums[c] / static_cast<double>(sizes[c]));
    }
    if (!std::isfinite(b)) continue;  // only one non-empty cluster
    const double denom = std::max(a, b);
    if (denom > 0.0) total += (b - a) / denom;
  }
  return total / static_cast<double>(n);
}

double mean_silhouette(const ClusterModel& model, std::span<const NormalizedProfile> profiles) {
  if (model.k < 2) throw Error(ErrorCode::SilhouetteUndefined, "silhouette needs at least two clusters");
  if (profiles.size() != model.size()) throw Error(ErrorCode::ShapeError, "profile count does not match model");
  for (std::size_t i = 0; i < profiles.size(); ++i) {
    if (profiles[i].building_id != model.ids[i]) {
      throw Error(ErrorCode::ShapeError, "profiles are not in model row order");
    }
  }
  return mean_silhouette(model.assignment, model.k, DistanceMatrix::compute(profiles));
}

std::string_view silhouette_advisory(double s) {
  if (s > 0.7) return "excellent";
  if (s >= 0.5) return "reasonable";
  return "weak";
}

SilhouetteSweep sweep(std::span<const NormalizedProfile> profiles, const SweepOptions& options) {
  return sweep(profiles, options, DistanceMatrix::compute(profiles));
}

SilhouetteSweep sweep(std::span<const NormalizedProfile> profiles, const SweepOptions& options,
                      const DistanceMatrix& distances) {
  if (options.k_min < 2 || options.k_min > options.k_max) {
    throw Error(ErrorCode::InvalidConfig, "sweep needs 2 <= k_min <= k_max");
  }
  if (options.k_max + 1 > profiles.size()) {
    throw Error(ErrorCode::TooFewProfiles, "k_max must be at most the profile count minus one");
  }
  if (options.restarts < 1) throw Error(ErrorCode::InvalidConfig, "restarts must be at least 1");
  if (distances.size() != profiles.size()) throw Error(ErrorCode::ShapeError, "distance matrix size mismatch");

  SilhouetteSweep result;
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t k = options.k_min; k <= options.k_max; ++k) {
    SweepRow row;
    row.k = k;
    row.mean_silhouette = -std::numeric_limits<double>::infinity();
    for (int r = 0; r < options.restarts; ++r) {
      KShapeOptions ko;
      ko.k = k;
      ko.seed = options.seed + static_cast<std::uint64_t>(r);
      ko.max_iter = options.max_iter;
      ko.n_init = options.n_init;
      const auto model = cluster(profiles, ko);
      const double s = mean_silhouette(model.assignment, k, distances);
      if (s > row.mean_silhouette) {
        row.mean_silhouette = s;
        row.iterations = model.iterations_run;
        row.seed = ko.seed;
      }
    }
    if (row.mean_silhouette > best) {
      best = row.mean_silhouette;
      result.recommended_k = k;
    }
    result.rows.push_back(row);
  }
  return result;
}

}  // namespace heatpat
