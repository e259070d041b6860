#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "heatpat/meterdata.hpp"

namespace heatpat {

/// Weekly load shapes for the four control strategies.
enum class Archetype { COC, NSB, TCO5, TCO7 };

inline constexpr std::array<Archetype, 4> kAllArchetypes = {Archetype::COC, Archetype::NSB,
                                                            Archetype::TCO5, Archetype::TCO7};

std::string_view to_string(Archetype archetype);

enum class InjectedFault { None, Scrambled, StuckMeter, LongGap };

std::string_view to_string(InjectedFault fault);

/// Building counts per archetype plus fault injections. Faulty buildings are
/// added on top of the clean counts.
struct SyntheticSpec {
  std::array<int, 4> counts{50, 50, 50, 50};  // COC, NSB, TCO5, TCO7
  /// Per-building persistent shape noise and hourly noise, both relative to the
  /// standard deviation of the building's seasonal template.
  double noise = 0.1;
  int year = 2016;
  int scrambled = 0;
  int stuck_meters = 0;
  int long_gaps = 0;
  /// Clean buildings that get a single reading multiplied by 100.
  int jumps = 0;
  /// Short (1-6 h) missing runs sprinkled into each clean building.
  int short_gaps_per_building = 0;
  std::uint64_t seed = 1;
};

struct GroundTruth {
  std::string building_id;
  Archetype archetype = Archetype::COC;
  CustomerCategory category = CustomerCategory::MultiDwelling;
  InjectedFault fault = InjectedFault::None;
  std::vector<std::size_t> jump_hours;  // indices of injected jumps
};

struct SyntheticData {
  std::vector<RawMeterSeries> series;
  std::vector<GroundTruth> truth;  // parallel to series
};

/// One week (168 hours from Monday 00:00) of relative load for an archetype.
std::vector<double> archetype_week(Archetype archetype);

/// Relative seasonal amplitude for winter, spring/autumn, shoulder, summer.
inline constexpr std::array<double, 4> kSeasonAmplitude = {1.6, 1.3, 1.0, 0.7};

SyntheticData generate_synthetic(const SyntheticSpec& spec);

/// Adjusted Rand index between two labelings of the same items.
double adjusted_rand_index(std::span<const int> a, std::span<const int> b);

/// Small portable RNG (mt19937_64 with hand-rolled distributions, so streams
/// match across standard library implementations).
class SyntheticRng {
 public:
  explicit SyntheticRng(std::uint64_t seed);
  double uniform();  // [0, 1)
  double normal();
  std::size_t below(std::size_t n);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace heatpat
