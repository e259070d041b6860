#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "heatpat/meterdata.hpp"

namespace heatpat {

using CategoryTable = std::map<std::string, CustomerCategory, std::less<>>;

struct IngestResult {
  std::vector<RawMeterSeries> series;  // in order of first appearance
  std::vector<std::string> warnings;
};

/// Accepts `YYYY-MM-DDTHH:MM[:SS]` (or a space separator). Minutes and seconds
/// must be zero.
HourPoint parse_timestamp(std::string_view text);
std::string format_timestamp(HourPoint t);

/// Reading rows `building_id,category,timestamp,heat_kw` with a header line.
/// The category column may be absent or empty when `metadata` supplies it.
/// An empty heat_kw field is a missing reading.
IngestResult parse_readings_csv(std::istream& in, const CategoryTable* metadata = nullptr);
IngestResult read_readings_csv(const std::filesystem::path& path,
                               const CategoryTable* metadata = nullptr);

/// Sidecar `building_id,category`.
CategoryTable parse_metadata_csv(std::istream& in);
CategoryTable read_metadata_csv(const std::filesystem::path& path);

void write_readings_csv(std::ostream& out, std::span<const RawMeterSeries> series);

struct ScreeningRow {
  std::string building_id;
  ScreenVerdict verdict;
};

void write_screening_report(std::ostream& out, std::span<const ScreeningRow> rows);

}  // namespace heatpat
