#include "heatpat/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>

#include "heatpat/error.hpp"
#include "heatpat/profiles.hpp"

namespace heatpat {

namespace {

// Space heating follows the outdoor temperature: highest before dawn.
double base_heating(std::size_t hour) {
  return 1.0 + 0.25 * std::cos(2.0 * std::numbers::pi * (static_cast<double>(hour) - 4.0) / 24.0);
}

double ventilation(std::size_t hour) {
  if (hour >= 7 && hour <= 17) return 1.0;
  if (hour == 6 || hour == 18) return 0.5;
  return 0.0;
}

// Setback overnight, then a short recovery boost once heating resumes.
double night_setback(double b, std::size_t hour) {
  if (hour >= 22 || hour < 5) return 0.5 * b;
  switch (hour) {
    case 5: return b + 0.2;
    case 6: return b + 0.14;
    case 7: return b + 0.06;
    default: return b;
  }
}

// Hot water and losses keep a floor under the seasonal space-heating load.
constexpr double kBaseLoad = 0.25;

// Archetype mix of customer categories, per archetype.
CustomerCategory draw_category(Archetype a, SyntheticRng& rng) {
  using C = CustomerCategory;
  static const std::map<Archetype, std::vector<std::pair<C, double>>> mix = {
      {Archetype::COC, {{C::MultiDwelling, 0.7}, {C::Commercial, 0.15}, {C::Industrial, 0.1}, {C::HealthSocial, 0.05}}},
      {Archetype::NSB, {{C::Commercial, 0.5}, {C::MultiDwelling, 0.3}, {C::PublicAdministration, 0.2}}},
      {Archetype::TCO5, {{C::School, 0.35}, {C::Commercial, 0.35}, {C::PublicAdministration, 0.3}}},
      {Archetype::TCO7, {{C::Commercial, 0.5}, {C::HealthSocial, 0.2}, {C::MultiDwelling, 0.3}}},
  };
  double u = rng.uniform();
  const auto& options = mix.at(a);
  for (const auto& [cat, p] : options) {
    if (u < p) return cat;
    u -= p;
  }
  return options.back().first;
}

double stddev(std::span<const double> v) {
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size()));
}

// table[season * 168 + hour_of_week]
std::vector<double> seasonal_table(Archetype a) {
  const auto week = archetype_week(a);
  std::vector<double> table;
  table.reserve(4 * kHoursPerWeek);
  for (double amp : kSeasonAmplitude) {
    for (double v : week) table.push_back(amp * v + kBaseLoad);
  }
  return table;
}

// Seasons blend linearly over the week either side of a month boundary where
// the season changes, so the load has no step at the boundary.
constexpr double kBlendHours = 7.0 * 24.0;

struct SeasonMix {
  std::size_t own = 0;
  std::size_t other = 0;
  double weight = 0.0;  // share of `other`
};

SeasonMix season_mix(HourPoint t, const SeasonPartition& partition) {
  using namespace std::chrono;
  const auto day = floor<days>(t);
  const year_month_day ymd{day};
  const auto season_at = [&](year_month ym) {
    return static_cast<std::size_t>(partition.season_of_month(static_cast<unsigned>(ym.month())));
  };
  const year_month ym{ymd.year(), ymd.month()};
  SeasonMix mix{season_at(ym), season_at(ym), 0.0};
  const HourPoint month_start{sys_days{ym / 1}};
  const HourPoint next_start{sys_days{(ym + months{1}) / 1}};
  const double since = static_cast<double>((t - month_start).count()) + 0.5;
  const double until = static_cast<double>((next_start - t).count()) - 0.5;
  const auto prev = season_at(ym - months{1});
  const auto next = season_at(ym + months{1});
  if (prev != mix.own && since < kBlendHours) {
    mix.other = prev;
    mix.weight = 0.5 * (1.0 - since / kBlendHours);
  } else if (next != mix.own && until < kBlendHours) {
    mix.other = next;
    mix.weight = 0.5 * (1.0 - until / kBlendHours);
  }
  return mix;
}

RawMeterSeries render_year(const std::string& id, CustomerCategory category, int year,
                           std::span<const double> table, double scale, double hourly_sd,
                           SyntheticRng& rng) {
  using namespace std::chrono;
  const auto partition = SeasonPartition::four_season();
  RawMeterSeries s;
  s.building_id = id;
  s.category = category;
  s.year = year;
  s.start = year_start(year);
  const auto n = static_cast<std::size_t>(hours_in_year(year));
  s.readings.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const HourPoint t = s.timestamp(i);
    const auto day = floor<days>(t);
    const auto mix = season_mix(t, partition);
    // Monday-based day of week
    const auto dow = static_cast<std::size_t>((weekday{day}.c_encoding() + 6) % 7);
    const auto how = dow * 24 + static_cast<std::size_t>((t - day).count());
    const double level = (1.0 - mix.weight) * table[mix.own * kHoursPerWeek + how] +
                         mix.weight * table[mix.other * kHoursPerWeek + how];
    const double v = scale * (level + hourly_sd * rng.normal());
    s.readings[i] = std::max(v, 0.0);
  }
  return s;
}

}  // namespace

std::string_view to_string(Archetype archetype) {
  switch (archetype) {
    case Archetype::COC: return "COC";
    case Archetype::NSB: return "NSB";
    case Archetype::TCO5: return "TCO5";
    case Archetype::TCO7: return "TCO7";
  }
  return "?";
}

std::string_view to_string(InjectedFault fault) {
  switch (fault) {
    case InjectedFault::None: return "None";
    case InjectedFault::Scrambled: return "Scrambled";
    case InjectedFault::StuckMeter: return "StuckMeter";
    case InjectedFault::LongGap: return "LongGap";
  }
  return "?";
}

SyntheticRng::SyntheticRng(std::uint64_t seed) : engine_(seed) {}

double SyntheticRng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double SyntheticRng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  spare_ = r * std::sin(2.0 * std::numbers::pi * u2);
  has_spare_ = true;
  return r * std::cos(2.0 * std::numbers::pi * u2);
}

std::size_t SyntheticRng::below(std::size_t n) {
  return static_cast<std::size_t>(uniform() * static_cast<double>(n));
}

std::vector<double> archetype_week(Archetype archetype) {
  std::vector<double> week(kHoursPerWeek);
  for (std::size_t d = 0; d < 7; ++d) {
    const bool weekend = d >= 5;
    for (std::size_t h = 0; h < 24; ++h) {
      const double b = base_heating(h);
      double v = b;
      switch (archetype) {
        case Archetype::COC: break;
        case Archetype::NSB: v = night_setback(b, h); break;
        case Archetype::TCO7: v = b + ventilation(h); break;
        case Archetype::TCO5: v = weekend ? 0.9 * b : b + ventilation(h); break;
      }
      week[d * 24 + h] = v;
    }
  }
  return week;
}

SyntheticData generate_synthetic(const SyntheticSpec& spec) {
  for (int c : spec.counts) {
    if (c < 0) throw Error(ErrorCode::InvalidConfig, "archetype counts must be non-negative");
  }
  if (spec.noise < 0.0) throw Error(ErrorCode::InvalidConfig, "noise must be non-negative");

  SyntheticRng rng(spec.seed);
  SyntheticData data;
  const std::size_t n_hours = static_cast<std::size_t>(hours_in_year(spec.year));

  auto next_id = [&data]() {
    char buf[16];
    std::snprintf(buf, sizeof buf, "B%04zu", data.series.size() + 1);
    return std::string(buf);
  };

  auto make_building = [&](Archetype a, InjectedFault fault) {
    auto table = seasonal_table(a);
    const double sd = stddev(table);
    for (double& v : table) v = std::max(v + spec.noise * sd * rng.normal(), 0.0);
    if (fault == InjectedFault::Scrambled) {
      // Fisher-Yates over the 672 season x hour-of-week cells
      for (std::size_t i = table.size() - 1; i > 0; --i) std::swap(table[i], table[rng.below(i + 1)]);
    }
    const double scale = 20.0 * std::exp(rng.normal() * 0.5);
    const auto category = draw_category(a, rng);
    const std::string id = next_id();
    auto series = render_year(id, category, spec.year, table, scale, spec.noise * sd, rng);
    data.truth.push_back(GroundTruth{id, a, category, fault, {}});
    data.series.push_back(std::move(series));
  };

  for (std::size_t ai = 0; ai < kAllArchetypes.size(); ++ai) {
    for (int i = 0; i < spec.counts[ai]; ++i) make_building(kAllArchetypes[ai], InjectedFault::None);
  }
  const std::size_t clean = data.series.size();

  // Short interior gaps in clean buildings; interpolation repairs them.
  for (std::size_t b = 0; b < clean; ++b) {
    for (int g = 0; g < spec.short_gaps_per_building; ++g) {
      const std::size_t len = 1 + rng.below(6);
      const std::size_t at = 24 + rng.below(n_hours - 48);
      for (std::size_t t = at; t < at + len; ++t) data.series[b].readings[t] = kMissing;
    }
  }
  for (int j = 0; j < spec.jumps && clean > 0; ++j) {
    const std::size_t b = rng.below(clean);
    const std::size_t at = 200 + rng.below(n_hours - 400);
    auto& v = data.series[b].readings[at];
    if (is_missing(v)) continue;
    v *= 100.0;
    data.truth[b].jump_hours.push_back(at);
  }

  auto pick_archetype = [&]() { return kAllArchetypes[rng.below(kAllArchetypes.size())]; };
  for (int i = 0; i < spec.scrambled; ++i) make_building(pick_archetype(), InjectedFault::Scrambled);
  for (int i = 0; i < spec.stuck_meters; ++i) {
    make_building(pick_archetype(), InjectedFault::StuckMeter);
    auto& v = data.series.back().readings;
    const std::size_t at = rng.below(n_hours - 100);
    std::fill(v.begin() + static_cast<std::ptrdiff_t>(at), v.begin() + static_cast<std::ptrdiff_t>(at + 72), v[at]);
  }
  for (int i = 0; i < spec.long_gaps; ++i) {
    make_building(pick_archetype(), InjectedFault::LongGap);
    auto& v = data.series.back().readings;
    const std::size_t at = rng.below(n_hours - 100);
    std::fill(v.begin() + static_cast<std::ptrdiff_t>(at), v.begin() + static_cast<std::ptrdiff_t>(at + 60), kMissing);
  }
  return data;
}

double adjusted_rand_index(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size()) throw Error(ErrorCode::ShapeError, "labelings differ in length");
  const std::size_t n = a.size();
  if (n < 2) return 1.0;
  std::map<std::pair<int, int>, long long> table;
  std::map<int, long long> rows;
  std::map<int, long long> cols;
  for (std::size_t i = 0; i < n; ++i) {
    ++table[{a[i], b[i]}];
    ++rows[a[i]];
    ++cols[b[i]];
  }
  auto pairs = [](long long x) { return static_cast<double>(x) * static_cast<double>(x - 1) / 2.0; };
  double index = 0.0;
  for (const auto& [_, c] : table) index += pairs(c);
  double sum_rows = 0.0;
  for (const auto& [_, c] : rows) sum_rows += pairs(c);
  double sum_cols = 0.0;
  for (const auto& [_, c] : cols) sum_cols += pairs(c);
  const double expected = sum_rows * sum_cols / pairs(static_cast<long long>(n));
  const double max_index = 0.5 * (sum_rows + sum_cols);
  if (max_index == expected) return 1.0;  // both trivial partitions
  return (index - expected) / (max_index - expected);
}

}  // namespace heatpat
