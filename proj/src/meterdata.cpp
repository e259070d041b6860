#include "heatpat/meterdata.hpp"

#include <algorithm>
#include <cstdlib>

#include "heatpat/error.hpp"

namespace heatpat {

namespace {

constexpr std::array<std::string_view, 6> kCategoryNames = {
    "MultiDwelling", "Commercial", "PublicAdministration", "HealthSocial", "School", "Industrial"};

// Median of a sorted, non-empty range.
double sorted_median(std::span<const double> sorted) {
  const std::size_t c = sorted.size();
  if (c % 2 == 1) return sorted[c / 2];
  return 0.5 * (sorted[c / 2 - 1] + sorted[c / 2]);
}

// Median absolute deviation around `med` for a sorted window. The deviations
// left of the median and right of it form two ascending sequences; merge them
// up to the middle rank instead of sorting.
double sorted_mad(std::span<const double> sorted, double med) {
  const std::size_t c = sorted.size();
  const auto split = static_cast<std::size_t>(
      std::lower_bound(sorted.begin(), sorted.end(), med) - sorted.begin());
  std::size_t left = split;   // next left candidate is sorted[left - 1]
  std::size_t right = split;  // next right candidate is sorted[right]
  auto next = [&]() {
    const bool has_left = left > 0;
    const bool has_right = right < c;
    if (has_left && (!has_right || med - sorted[left - 1] <= sorted[right] - med)) {
      return med - sorted[--left];
    }
    return sorted[right++] - med;
  };
  const std::size_t target = c / 2;  // rank of the upper middle element
  double prev = 0.0;
  double cur = 0.0;
  for (std::size_t r = 0; r <= target; ++r) {
    prev = cur;
    cur = next();
  }
  if (c % 2 == 1) return cur;
  return 0.5 * (prev + cur);
}

}  // namespace

std::string_view to_string(CustomerCategory category) {
  return kCategoryNames[static_cast<std::size_t>(category)];
}

CustomerCategory parse_category(std::string_view name) {
  for (std::size_t i = 0; i < kCategoryNames.size(); ++i) {
    if (kCategoryNames[i] == name) return kAllCategories[i];
  }
  throw Error(ErrorCode::InputError, "unknown customer category '" + std::string(name) + "'");
}

std::string_view to_string(Decision decision) {
  return decision == Decision::Accept ? "Accept" : "Reject";
}

std::string_view to_string(RejectReason reason) {
  switch (reason) {
    case RejectReason::IncompleteYear: return "IncompleteYear";
    case RejectReason::LongGap: return "LongGap";
    case RejectReason::TotalGapBudget: return "TotalGapBudget";
    case RejectReason::StuckMeter: return "StuckMeter";
  }
  return "?";
}

HourPoint year_start(int year) {
  using namespace std::chrono;
  return HourPoint{sys_days{std::chrono::year{year} / January / 1}};
}

int hours_in_year(int year) {
  return std::chrono::year{year}.is_leap() ? 8784 : 8760;
}

bool RawMeterSeries::covers_calendar_year() const {
  return start == year_start(year) &&
         readings.size() == static_cast<std::size_t>(hours_in_year(year));
}

std::vector<std::size_t> detect_jumps(std::span<const double> values, int window_hours,
                                      double eps_mad, double multiplier) {
  if (window_hours < 3 || window_hours % 2 == 0) {
    throw Error(ErrorCode::InvalidWindow, "window must be odd and >= 3");
  }
  const std::size_t n = values.size();
  if (static_cast<std::size_t>(window_hours) > n) {
    throw Error(ErrorCode::InvalidWindow, "window of " + std::to_string(window_hours) +
                                              " h exceeds series length " + std::to_string(n));
  }
  const std::size_t half = static_cast<std::size_t>(window_hours / 2);

  std::vector<double> window;
  window.reserve(static_cast<std::size_t>(window_hours));
  auto insert = [&](double v) {
    window.insert(std::upper_bound(window.begin(), window.end(), v), v);
  };
  auto erase = [&](double v) {
    window.erase(std::lower_bound(window.begin(), window.end(), v));
  };

  for (std::size_t j = 0; j <= std::min(half, n - 1); ++j) {
    if (!is_missing(values[j])) insert(values[j]);
  }

  std::vector<std::size_t> jumps;
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0) {
      const std::size_t incoming = i + half;
      if (incoming < n && !is_missing(values[incoming])) insert(values[incoming]);
      if (i > half) {
        const double outgoing = values[i - half - 1];
        if (!is_missing(outgoing)) erase(outgoing);
      }
    }
    const double x = values[i];
    if (is_missing(x)) continue;
    const double med = sorted_median(window);
    const double mad = sorted_mad(window, med);
    if (std::abs(x - med) > multiplier * std::max(mad, eps_mad)) jumps.push_back(i);
  }
  return jumps;
}

std::vector<std::size_t> detect_jumps(const RawMeterSeries& series, const CleaningParams& params) {
  return detect_jumps(series.readings, params.window_hours, params.eps_mad, params.mad_multiplier);
}

RepairedSeries repair(const RawMeterSeries& series, std::span<const std::size_t> jump_indices) {
  const std::size_t n = series.readings.size();
  std::vector<bool> bad(n, false);
  for (std::size_t i = 0; i < n; ++i) bad[i] = is_missing(series.readings[i]);
  for (std::size_t j : jump_indices) {
    if (j >= n) throw Error(ErrorCode::InputError, "jump index out of range");
    bad[j] = true;
  }

  RepairedSeries out{series, 0};
  auto& v = out.series.readings;
  if (std::find(bad.begin(), bad.end(), false) == bad.end()) {
    throw Error(ErrorCode::Unrepairable, "building " + series.building_id + " has no valid reading");
  }

  std::size_t i = 0;
  while (i < n) {
    if (!bad[i]) {
      ++i;
      continue;
    }
    std::size_t end = i;
    while (end < n && bad[end]) ++end;
    // run is [i, end)
    if (i == 0) {
      std::fill(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(end), v[end]);
    } else if (end == n) {
      std::fill(v.begin() + static_cast<std::ptrdiff_t>(i), v.end(), v[i - 1]);
    } else {
      const double lo = v[i - 1];
      const double hi = v[end];
      const double span = static_cast<double>(end - (i - 1));
      for (std::size_t t = i; t < end; ++t) {
        v[t] = lo + (hi - lo) * static_cast<double>(t - (i - 1)) / span;
      }
    }
    out.repaired_count += static_cast<int>(end - i);
    i = end;
  }
  return out;
}

ScreenVerdict screen(const RawMeterSeries& series, const CleaningParams& params) {
  if (!series.covers_calendar_year()) return ScreenVerdict::reject(RejectReason::IncompleteYear);

  const auto& v = series.readings;
  std::size_t total_missing = 0;
  std::size_t longest_gap = 0;
  std::size_t gap = 0;
  std::size_t longest_stuck = 0;
  std::size_t stuck = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (is_missing(v[i])) {
      ++total_missing;
      longest_gap = std::max(longest_gap, ++gap);
      stuck = 0;
      continue;
    }
    gap = 0;
    stuck = (stuck > 0 && v[i] == v[i - 1]) ? stuck + 1 : 1;
    longest_stuck = std::max(longest_stuck, stuck);
  }

  if (longest_gap > static_cast<std::size_t>(params.max_gap_hours)) {
    return ScreenVerdict::reject(RejectReason::LongGap);
  }
  if (total_missing > static_cast<std::size_t>(params.max_total_missing_hours)) {
    return ScreenVerdict::reject(RejectReason::TotalGapBudget);
  }
  if (longest_stuck >= static_cast<std::size_t>(params.stuck_run_hours)) {
    return ScreenVerdict::reject(RejectReason::StuckMeter);
  }
  return ScreenVerdict::accept();
}

CleaningOutcome clean(const RawMeterSeries& series, const CleaningParams& params) {
  CleaningOutcome out{screen(series, params), std::nullopt};
  if (!out.verdict.accepted()) return out;
  const auto jumps = detect_jumps(series, params);
  auto repaired = repair(series, jumps);
  out.verdict.repaired_count = repaired.repaired_count;
  out.cleaned = std::move(repaired.series);
  return out;
}

}  // namespace heatpat
