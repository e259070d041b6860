#include "heatpat/kshape.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>

#include "heatpat/error.hpp"
#include "heatpat/sbd.hpp"

namespace heatpat {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

void center(std::vector<double>& v) {
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  for (double& x : v) x -= mean;
}

bool is_zero(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Dominant eigenvector of Q X^T X Q (Q = centring projector) by power
// iteration. Rows of `aligned` are X.
std::vector<double> dominant_direction(const std::vector<std::vector<double>>& aligned,
                                       std::vector<double> start, const ShapeExtractOptions& opt) {
  const std::size_t m = start.size();
  center(start);
  double n0 = norm(start);
  if (!(n0 > 0.0)) throw Error(ErrorCode::DegenerateCluster, "no usable start direction");
  for (double& x : start) x /= n0;

  std::vector<double> v = std::move(start);
  std::vector<double> w(m);
  std::vector<double> proj(aligned.size());
  for (int it = 0; it < opt.max_iterations; ++it) {
    for (std::size_t i = 0; i < aligned.size(); ++i) proj[i] = dot(aligned[i], v);
    std::fill(w.begin(), w.end(), 0.0);
    for (std::size_t i = 0; i < aligned.size(); ++i) {
      const double p = proj[i];
      const auto& row = aligned[i];
      for (std::size_t j = 0; j < m; ++j) w[j] += p * row[j];
    }
    center(w);
    const double nw = norm(w);
    if (!(nw > 0.0)) throw Error(ErrorCode::DegenerateCluster, "aligned members carry no shape");
    double delta = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      w[j] /= nw;
      delta += (w[j] - v[j]) * (w[j] - v[j]);
    }
    v.swap(w);
    if (std::sqrt(delta) < opt.tolerance) break;
  }
  return v;
}

std::vector<double> to_z(std::vector<double> v) {
  center(v);
  const double sd = norm(v) / std::sqrt(static_cast<double>(v.size()));
  if (!(sd > 0.0)) throw Error(ErrorCode::DegenerateCluster, "centroid collapsed to a constant");
  for (double& x : v) x /= sd;
  return v;
}

// Shape extraction given member spectra; shared by the public entry point and
// the clustering loop.
std::vector<double> extract(const SbdEngine& engine, std::span<const SbdEngine::Spectrum* const> members,
                            std::span<const double> previous, const ShapeExtractOptions& opt) {
  if (members.empty()) throw Error(ErrorCode::DegenerateCluster, "cluster has no members");
  const std::size_t m = engine.length();

  std::vector<std::vector<double>> aligned;
  aligned.reserve(members.size());
  const bool have_previous = !is_zero(previous);
  std::optional<SbdEngine::Spectrum> prev_spec;
  if (have_previous) prev_spec = engine.transform(previous);
  for (const auto* member : members) {
    if (have_previous) {
      const int shift = engine.sbd(*prev_spec, *member).shift;
      aligned.push_back(align(member->values, shift));
    } else {
      aligned.push_back(member->values);
    }
  }

  std::vector<double> reference(m, 0.0);
  if (have_previous) {
    reference.assign(previous.begin(), previous.end());
  } else {
    for (const auto& row : aligned) {
      for (std::size_t j = 0; j < m; ++j) reference[j] += row[j];
    }
  }

  std::vector<double> start = reference;
  center(start);
  if (!(norm(start) > 1e-12)) {
    // members cancel out (e.g. {v, -v} without a previous centroid)
    start.assign(m, 0.0);
    for (const auto& row : aligned) {
      std::vector<double> c = row;
      center(c);
      if (norm(c) > 1e-12) {
        start = std::move(c);
        break;
      }
    }
    reference = start;
  }

  auto direction = dominant_direction(aligned, std::move(start), opt);
  if (dot(direction, reference) < 0.0) {
    for (double& x : direction) x = -x;
  }
  return to_z(std::move(direction));
}

}  // namespace

std::vector<std::size_t> ClusterModel::members(int cluster) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    if (assignment[i] == cluster) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> ClusterModel::cluster_sizes() const {
  std::vector<std::size_t> sizes(k, 0);
  for (int c : assignment) ++sizes[static_cast<std::size_t>(c)];
  return sizes;
}

std::vector<double> shape_extract(std::span<const std::vector<double>> members,
                                  std::span<const double> previous_centroid,
                                  const ShapeExtractOptions& options) {
  if (members.empty()) throw Error(ErrorCode::DegenerateCluster, "cluster has no members");
  const std::size_t m = members.front().size();
  for (const auto& x : members) {
    if (x.size() != m) throw Error(ErrorCode::ShapeError, "members differ in length");
  }
  if (previous_centroid.size() != m) throw Error(ErrorCode::ShapeError, "centroid length mismatch");

  SbdEngine engine(m);
  std::vector<SbdEngine::Spectrum> spectra;
  spectra.reserve(members.size());
  for (const auto& x : members) {
    if (is_zero(x)) {
      SbdEngine::Spectrum zero;  // contributes nothing to the accumulation
      zero.values = x;
      spectra.push_back(std::move(zero));
    } else {
      spectra.push_back(engine.transform(x));
    }
  }
  std::vector<const SbdEngine::Spectrum*> nonzero;
  for (const auto& s : spectra) {
    if (s.norm > 0.0) nonzero.push_back(&s);
  }
  if (nonzero.empty()) throw Error(ErrorCode::DegenerateCluster, "all members are zero");
  return extract(engine, nonzero, previous_centroid, options);
}

double shape_objective(std::span<const std::vector<double>> members, std::span<const double> centroid) {
  double total = 0.0;
  for (const auto& x : members) {
    const double best = 1.0 - sbd(x, centroid).distance;
    total += best * best;
  }
  return total;
}

namespace {

ClusterModel cluster_once(std::span<const NormalizedProfile> profiles, const KShapeOptions& options,
                          std::uint64_t init_seed) {
  const std::size_t n = profiles.size();
  const std::size_t k = options.k;
  if (k < 1) throw Error(ErrorCode::InvalidConfig, "k must be at least 1");
  if (options.max_iter < 1) throw Error(ErrorCode::InvalidConfig, "max_iter must be at least 1");
  if (k > n) {
    throw Error(ErrorCode::TooFewProfiles,
                std::to_string(n) + " profiles cannot form " + std::to_string(k) + " clusters");
  }
  const std::size_t m = profiles.front().z.size();
  for (const auto& p : profiles) {
    if (p.z.size() != m) throw Error(ErrorCode::ShapeError, "profiles differ in length");
  }

  SbdEngine engine(m);
  std::vector<SbdEngine::Spectrum> spectra;
  spectra.reserve(n);
  for (const auto& p : profiles) spectra.push_back(engine.transform(p.z));

  ClusterModel model;
  model.k = k;
  model.seed = options.seed;
  model.init_seed = init_seed;
  model.ids.reserve(n);
  for (const auto& p : profiles) model.ids.push_back(p.building_id);

  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    labels[i] = static_cast<int>(splitmix64(init_seed ^ fnv1a(profiles[i].building_id)) % k);
  }

  std::vector<std::vector<double>> centroids(k, std::vector<double>(m, 0.0));
  std::vector<double> dist(n, 0.0);

  auto extract_all = [&](const std::vector<int>& lab) {
    for (std::size_t c = 0; c < k; ++c) {
      std::vector<const SbdEngine::Spectrum*> members;
      for (std::size_t i = 0; i < n; ++i) {
        if (lab[i] == static_cast<int>(c)) members.push_back(&spectra[i]);
      }
      if (members.empty()) continue;
      centroids[c] = extract(engine, members, centroids[c], options.extraction);
    }
  };

  bool converged = false;
  bool last_repaired = false;
  std::size_t iterations = 0;
  for (int it = 0; it < options.max_iter; ++it) {
    ++iterations;
    extract_all(labels);

    std::vector<std::optional<SbdEngine::Spectrum>> centroid_spectra(k);
    for (std::size_t c = 0; c < k; ++c) {
      if (!is_zero(centroids[c])) centroid_spectra[c] = engine.transform(centroids[c]);
    }

    std::vector<int> next(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      int best_c = 0;
      for (std::size_t c = 0; c < k; ++c) {
        if (!centroid_spectra[c]) continue;
        const double d = engine.sbd(spectra[i], *centroid_spectra[c]).distance;
        if (d < best) {
          best = d;
          best_c = static_cast<int>(c);
        }
      }
      next[i] = best_c;
      dist[i] = best;
    }

    double objective = 0.0;
    for (double d : dist) objective += (1.0 - d) * (1.0 - d);
    model.objective_history.push_back(objective);

    // Empty clusters take the profile farthest from its own centroid, measured
    // against centroids of the new assignment rather than the stale ones.
    // Profiles beyond mean + 3 sd of their cluster's distances are skipped:
    // seeding a cluster with an outlier leaves a singleton that never grows.
    bool repaired = false;
    std::vector<std::size_t> sizes(k, 0);
    for (int c : next) ++sizes[static_cast<std::size_t>(c)];
    const bool any_empty = std::find(sizes.begin(), sizes.end(), 0) != sizes.end();
    std::vector<double> spread;
    std::vector<double> cutoff;
    if (any_empty) {
      extract_all(next);
      std::vector<std::optional<SbdEngine::Spectrum>> cs(k);
      for (std::size_t c = 0; c < k; ++c) {
        if (sizes[c] != 0) cs[c] = engine.transform(centroids[c]);
      }
      spread.resize(n);
      for (std::size_t i = 0; i < n; ++i) {
        spread[i] = engine.sbd(spectra[i], *cs[static_cast<std::size_t>(next[i])]).distance;
      }
      std::vector<double> sum(k, 0.0), sum_sq(k, 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        const auto c = static_cast<std::size_t>(next[i]);
        sum[c] += spread[i];
        sum_sq[c] += spread[i] * spread[i];
      }
      cutoff.assign(k, std::numeric_limits<double>::infinity());
      for (std::size_t c = 0; c < k; ++c) {
        if (sizes[c] < 2) continue;
        const double size = static_cast<double>(sizes[c]);
        const double mean = sum[c] / size;
        const double var = std::max(sum_sq[c] / size - mean * mean, 0.0);
        if (var > 1e-12) cutoff[c] = mean + 3.0 * std::sqrt(var);
      }
    }
    std::vector<bool> moved(n, false);
    for (std::size_t c = 0; c < k; ++c) {
      if (sizes[c] != 0) continue;
      std::optional<std::size_t> donor;
      for (bool skip_outliers : {true, false}) {
        for (std::size_t i = 0; i < n; ++i) {
          if (moved[i] || sizes[static_cast<std::size_t>(next[i])] < 2) continue;
          if (skip_outliers && spread[i] >= cutoff[static_cast<std::size_t>(next[i])]) continue;
          if (!donor || spread[i] > spread[*donor]) donor = i;
        }
        if (donor) break;
      }
      if (!donor) break;  // unreachable while k <= n
      --sizes[static_cast<std::size_t>(next[*donor])];
      next[*donor] = static_cast<int>(c);
      ++sizes[c];
      moved[*donor] = true;
      repaired = true;
    }

    // A repair that hands back the previous labels is a fixed point too; the
    // same cluster would empty and be refilled on every further pass.
    const bool unchanged = (next == labels);
    labels = std::move(next);
    last_repaired = repaired;
    if (unchanged) {
      converged = true;
      break;
    }
  }

  if (!converged || last_repaired) {
    // Bring centroids and distances in line with the final labels.
    extract_all(labels);
    std::vector<SbdEngine::Spectrum> cs;
    cs.reserve(k);
    for (const auto& c : centroids) cs.push_back(engine.transform(c));
    for (std::size_t i = 0; i < n; ++i) {
      dist[i] = engine.sbd(spectra[i], cs[static_cast<std::size_t>(labels[i])]).distance;
    }
  }

  model.iterations_run = iterations;
  model.converged = converged;
  model.centroids = std::move(centroids);
  model.assignment = std::move(labels);
  model.distances = std::move(dist);
  return model;
}

// Centroids are only defined up to a lag and can drift a few hours during the
// iterations. Re-extract each one with members aligned to their plain mean so
// patterns stay in calendar phase, then refresh the distances.
void anchor_phase(ClusterModel& model, std::span<const NormalizedProfile> profiles,
                  const ShapeExtractOptions& options) {
  const std::size_t m = model.centroids.front().size();
  for (std::size_t c = 0; c < model.k; ++c) {
    std::vector<std::vector<double>> members;
    std::vector<double> mean(m, 0.0);
    for (std::size_t i : model.members(static_cast<int>(c))) {
      members.push_back(profiles[i].z);
      for (std::size_t j = 0; j < m; ++j) mean[j] += profiles[i].z[j];
    }
    if (is_zero(mean)) continue;
    model.centroids[c] = shape_extract(members, mean, options);
  }
  SbdEngine engine(m);
  std::vector<SbdEngine::Spectrum> cs;
  for (const auto& c : model.centroids) cs.push_back(engine.transform(c));
  for (std::size_t i = 0; i < profiles.size(); ++i) {
    model.distances[i] = engine.sbd(engine.transform(profiles[i].z), cs[static_cast<std::size_t>(model.assignment[i])]).distance;
  }
}

}  // namespace

ClusterModel cluster(std::span<const NormalizedProfile> profiles, const KShapeOptions& options) {
  if (options.n_init < 1) throw Error(ErrorCode::InvalidConfig, "n_init must be at least 1");
  std::optional<ClusterModel> best;
  double best_objective = -1.0;
  for (int r = 0; r < options.n_init; ++r) {
    const std::uint64_t init_seed = r == 0 ? options.seed : splitmix64(options.seed + static_cast<std::uint64_t>(r));
    auto model = cluster_once(profiles, options, init_seed);
    double objective = 0.0;
    for (double d : model.distances) objective += (1.0 - d) * (1.0 - d);
    if (objective > best_objective) {
      best_objective = objective;
      best = std::move(model);
    }
  }
  ClusterModel model = std::move(*best);
  anchor_phase(model, profiles, options.extraction);
  return model;
}

}  // namespace heatpat
