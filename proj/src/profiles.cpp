#include "heatpat/profiles.hpp"

#include <cmath>
#include <numeric>

#include "heatpat/error.hpp"

namespace heatpat {

SeasonPartition SeasonPartition::four_season() {
  //                  J  F  M  A  M  J  J  A  S  O  N  D
  return {"4-season",
          {"winter", "spring_autumn", "shoulder", "summer"},
          {0, 0, 1, 1, 2, 3, 3, 3, 2, 1, 1, 0}};
}

SeasonPartition SeasonPartition::three_season() {
  return {"3-season",
          {"winter", "spring_autumn", "summer"},
          {0, 0, 1, 1, 2, 2, 2, 2, 2, 1, 1, 0}};
}

SeasonPartition SeasonPartition::from_id(const std::string& id) {
  if (id == "4-season") return four_season();
  if (id == "3-season") return three_season();
  throw Error(ErrorCode::InvalidConfig, "unknown season partition '" + id + "'");
}

HeatLoadProfile extract_profile(const RawMeterSeries& series, const SeasonPartition& partition) {
  using namespace std::chrono;
  for (double v : series.readings) {
    if (is_missing(v)) {
      throw Error(ErrorCode::InputError, "building " + series.building_id + " has unrepaired gaps");
    }
  }
  const std::size_t seasons = partition.season_count();
  HeatLoadProfile profile;
  profile.building_id = series.building_id;
  profile.seasonal.assign(seasons, std::vector<double>(kHoursPerWeek, 0.0));
  profile.weeks_used.assign(seasons, 0);

  const sys_days first_day = floor<days>(series.start);
  // days until the first Monday at or after the first full day
  sys_days day = first_day;
  if (series.start != HourPoint{first_day}) day += days{1};
  day += (Monday - weekday{day});

  const HourPoint end = series.timestamp(series.readings.size());
  for (; HourPoint{day} + hours{kHoursPerWeek} <= end; day += weeks{1}) {
    const year_month_day thursday{day + days{3}};
    const auto s = static_cast<std::size_t>(
        partition.season_of_month(static_cast<unsigned>(thursday.month())));
    const auto offset = static_cast<std::size_t>((HourPoint{day} - series.start).count());
    auto& acc = profile.seasonal[s];
    for (std::size_t h = 0; h < kHoursPerWeek; ++h) acc[h] += series.readings[offset + h];
    ++profile.weeks_used[s];
  }

  for (std::size_t s = 0; s < seasons; ++s) {
    if (profile.weeks_used[s] == 0) {
      throw Error(ErrorCode::EmptySeason, "building " + series.building_id + " has no full week in " +
                                              partition.names[s]);
    }
    const double w = profile.weeks_used[s];
    for (double& a : profile.seasonal[s]) a /= w;
  }
  return profile;
}

std::vector<double> concatenate(const HeatLoadProfile& profile) {
  std::vector<double> out;
  out.reserve(profile.seasonal.size() * kHoursPerWeek);
  for (const auto& block : profile.seasonal) out.insert(out.end(), block.begin(), block.end());
  return out;
}

std::vector<double> z_normalize(std::span<const double> values, double eps_std) {
  if (values.empty()) throw Error(ErrorCode::DegenerateProfile, "empty sequence");
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / n);
  if (!(sd > eps_std)) {
    throw Error(ErrorCode::DegenerateProfile, "near-constant sequence (std " + std::to_string(sd) + ")");
  }
  std::vector<double> z(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) z[i] = (values[i] - mean) / sd;
  return z;
}

NormalizedProfile normalize(const HeatLoadProfile& profile, const SeasonPartition& partition,
                            double eps_std) {
  if (profile.seasonal.size() != partition.season_count()) {
    throw Error(ErrorCode::ShapeError, "profile season count does not match partition");
  }
  try {
    return {profile.building_id, z_normalize(concatenate(profile), eps_std)};
  } catch (const Error& e) {
    throw Error(e.code(), "building " + profile.building_id + ": " + e.what());
  }
}

std::vector<std::vector<double>> deconcatenate(std::span<const double> z,
                                               const SeasonPartition& partition) {
  if (z.size() != partition.profile_length()) {
    throw Error(ErrorCode::ShapeError, "expected " + std::to_string(partition.profile_length()) +
                                           " points, got " + std::to_string(z.size()));
  }
  std::vector<std::vector<double>> blocks;
  blocks.reserve(partition.season_count());
  for (std::size_t s = 0; s < partition.season_count(); ++s) {
    const auto first = z.begin() + static_cast<std::ptrdiff_t>(s * kHoursPerWeek);
    blocks.emplace_back(first, first + static_cast<std::ptrdiff_t>(kHoursPerWeek));
  }
  return blocks;
}

}  // namespace heatpat
