#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "heatpat/meterdata.hpp"

namespace heatpat {

inline constexpr std::size_t kHoursPerWeek = 168;

/// Month -> season mapping. Seasons are indexed 0..count-1 in display and
/// concatenation order.
struct SeasonPartition {
  std::string id;
  std::vector<std::string> names;
  std::array<int, 12> month_to_season{};  // index 0 = January

  /// winter {Dec,Jan,Feb}, spring/autumn {Mar,Apr,Oct,Nov}, shoulder {May,Sep},
  /// summer {Jun,Jul,Aug}.
  static SeasonPartition four_season();
  /// May/Sep merged into summer.
  static SeasonPartition three_season();
  /// "4-season" or "3-season".
  static SeasonPartition from_id(const std::string& id);

  std::size_t season_count() const { return names.size(); }
  std::size_t profile_length() const { return kHoursPerWeek * names.size(); }
  int season_of_month(unsigned month) const { return month_to_season.at(month - 1); }
};

/// Per season, the mean load at each hour of the week (hour 0 = Monday 00:00).
struct HeatLoadProfile {
  std::string building_id;
  std::vector<std::vector<double>> seasonal;  // [season][hour of week]
  std::vector<int> weeks_used;                // per season
};

struct NormalizedProfile {
  std::string building_id;
  std::vector<double> z;
};

/// Averages whole Monday-aligned weeks; a week belongs to the season of its
/// Thursday's month. Partial weeks at either end of the year are dropped.
HeatLoadProfile extract_profile(const RawMeterSeries& series, const SeasonPartition& partition);

std::vector<double> concatenate(const HeatLoadProfile& profile);

/// (x - mean) / population std. Throws DegenerateProfile when std <= eps_std.
std::vector<double> z_normalize(std::span<const double> values, double eps_std = 1e-6);

NormalizedProfile normalize(const HeatLoadProfile& profile, const SeasonPartition& partition,
                            double eps_std = 1e-6);

std::vector<std::vector<double>> deconcatenate(std::span<const double> z,
                                               const SeasonPartition& partition);

}  // namespace heatpat
