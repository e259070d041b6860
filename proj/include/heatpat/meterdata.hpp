#pragma once

#include <array>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace heatpat {

enum class CustomerCategory {
  MultiDwelling,
  Commercial,
  PublicAdministration,
  HealthSocial,
  School,
  Industrial,
};

inline constexpr std::array<CustomerCategory, 6> kAllCategories = {
    CustomerCategory::MultiDwelling, CustomerCategory::Commercial,
    CustomerCategory::PublicAdministration, CustomerCategory::HealthSocial,
    CustomerCategory::School, CustomerCategory::Industrial};

std::string_view to_string(CustomerCategory category);
/// Throws Error(InputError) for names outside the closed set.
CustomerCategory parse_category(std::string_view name);

/// Local clock time at hour resolution. Timestamps are naive: daylight saving
/// is not modelled, every calendar hour maps to exactly one slot.
using HourPoint = std::chrono::sys_time<std::chrono::hours>;

HourPoint year_start(int year);
int hours_in_year(int year);

inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();
inline bool is_missing(double value) { return std::isnan(value); }

/// One building's hourly heat load (kW) for a single calendar year.
/// `readings[i]` belongs to `start + i` hours; missing slots hold kMissing.
struct RawMeterSeries {
  std::string building_id;
  CustomerCategory category = CustomerCategory::MultiDwelling;
  int year = 0;
  HourPoint start{};
  std::vector<double> readings;

  HourPoint timestamp(std::size_t index) const {
    return start + std::chrono::hours(static_cast<long>(index));
  }
  bool covers_calendar_year() const;
};

struct CleaningParams {
  int window_hours = 169;
  double eps_mad = 0.1;
  int max_gap_hours = 48;
  int max_total_missing_hours = 720;
  int stuck_run_hours = 48;
  double mad_multiplier = 5.0;
};

enum class Decision { Accept, Reject };
enum class RejectReason { IncompleteYear, LongGap, TotalGapBudget, StuckMeter };

std::string_view to_string(Decision decision);
std::string_view to_string(RejectReason reason);

struct ScreenVerdict {
  Decision decision = Decision::Accept;
  std::optional<RejectReason> reason;
  int repaired_count = 0;

  static ScreenVerdict accept(int repaired = 0) { return {Decision::Accept, std::nullopt, repaired}; }
  static ScreenVerdict reject(RejectReason why) { return {Decision::Reject, why, 0}; }
  bool accepted() const { return decision == Decision::Accept; }
  bool operator==(const ScreenVerdict&) const = default;
};

/// Indices whose value lies more than `multiplier * max(MAD, eps_mad)` away
/// from the median of the centred window (truncated at the series edges).
/// Missing values are skipped both as candidates and in window statistics.
std::vector<std::size_t> detect_jumps(std::span<const double> values, int window_hours,
                                      double eps_mad = 0.1, double multiplier = 5.0);
std::vector<std::size_t> detect_jumps(const RawMeterSeries& series, const CleaningParams& params);

struct RepairedSeries {
  RawMeterSeries series;
  int repaired_count = 0;
};

/// Replaces jump indices and missing slots by linear interpolation between the
/// nearest valid neighbours; runs touching an edge take the nearest valid value.
RepairedSeries repair(const RawMeterSeries& series, std::span<const std::size_t> jump_indices);

/// Gap and stuck-meter rules are evaluated on the unrepaired series.
ScreenVerdict screen(const RawMeterSeries& series, const CleaningParams& params = {});

struct CleaningOutcome {
  ScreenVerdict verdict;
  std::optional<RawMeterSeries> cleaned;  // present iff accepted
};

/// screen -> detect_jumps -> repair.
CleaningOutcome clean(const RawMeterSeries& series, const CleaningParams& params = {});

}  // namespace heatpat
