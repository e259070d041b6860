#pragma once
// Planted-structure inputs shared by the clustering tests and the acceptance run.

#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "heatpat/meterdata.hpp"
#include "heatpat/profiles.hpp"
#include "heatpat/synthetic.hpp"

namespace fixture {

enum class Shape { Sine, Square, Sawtooth };

inline std::vector<double> shape(Shape s, std::size_t m) {
  std::vector<double> v(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double phase = static_cast<double>(i) / static_cast<double>(m);
    switch (s) {
      case Shape::Sine: v[i] = std::sin(2.0 * std::numbers::pi * phase); break;
      case Shape::Square: v[i] = phase < 0.5 ? 1.0 : -1.0; break;
      case Shape::Sawtooth: v[i] = 2.0 * std::fmod(3.0 * phase, 1.0) - 1.0; break;
    }
  }
  return heatpat::z_normalize(v);
}

inline std::vector<double> noisy(const std::vector<double>& base, double sigma, std::mt19937_64& rng) {
  std::normal_distribution<double> nd(0.0, sigma);
  auto v = base;
  for (double& x : v) x += nd(rng);
  return heatpat::z_normalize(v);
}

struct Labeled {
  std::vector<heatpat::NormalizedProfile> profiles;
  std::vector<int> truth;
};

inline Labeled planted(std::size_t per_group, std::size_t m, double sigma, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Labeled out;
  int g = 0;
  for (Shape s : {Shape::Sine, Shape::Square, Shape::Sawtooth}) {
    const auto base = shape(s, m);
    for (std::size_t i = 0; i < per_group; ++i) {
      out.profiles.push_back({"G" + std::to_string(g) + "_" + std::to_string(i), noisy(base, sigma, rng)});
      out.truth.push_back(g);
    }
    ++g;
  }
  return out;
}

struct SyntheticProfiles {
  std::vector<heatpat::NormalizedProfile> profiles;
  std::vector<heatpat::GroundTruth> truth;  // parallel to profiles
};

/// Generator output pushed through cleaning, profiling and normalisation.
inline SyntheticProfiles synthetic_profiles(const heatpat::SyntheticSpec& spec) {
  const auto data = heatpat::generate_synthetic(spec);
  const auto part = heatpat::SeasonPartition::four_season();
  SyntheticProfiles out;
  for (std::size_t i = 0; i < data.series.size(); ++i) {
    const auto cleaned = heatpat::clean(data.series[i]);
    if (!cleaned.cleaned) continue;
    out.profiles.push_back(heatpat::normalize(heatpat::extract_profile(*cleaned.cleaned, part), part));
    out.truth.push_back(data.truth[i]);
  }
  return out;
}

inline std::vector<int> archetype_labels(const std::vector<heatpat::GroundTruth>& truth) {
  std::vector<int> out;
  for (const auto& t : truth) out.push_back(static_cast<int>(t.archetype));
  return out;
}

}  // namespace fixture
