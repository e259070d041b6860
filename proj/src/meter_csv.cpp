#include "heatpat/meter_csv.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_map>

#include "heatpat/error.hpp"
#include "text.hpp"

namespace heatpat {

namespace {

int parse_int(std::string_view s, std::string_view what) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw Error(ErrorCode::InputError, "bad " + std::string(what) + " in '" + std::string(s) + "'");
  }
  return v;
}

std::string line_context(std::size_t line_no) { return " (line " + std::to_string(line_no) + ")"; }

struct Columns {
  int building = -1;
  int category = -1;
  int timestamp = -1;
  int heat = -1;
};

Columns map_header(const std::vector<std::string_view>& fields) {
  Columns c;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    const auto f = fields[i];
    const int idx = static_cast<int>(i);
    if (f == "building_id") c.building = idx;
    else if (f == "category") c.category = idx;
    else if (f == "timestamp") c.timestamp = idx;
    else if (f == "heat_kw") c.heat = idx;
  }
  if (c.building < 0 || c.timestamp < 0 || c.heat < 0) {
    throw Error(ErrorCode::InputError,
                "readings header must name building_id, timestamp and heat_kw columns");
  }
  return c;
}

struct Pending {
  std::string id;
  CustomerCategory category{};
  bool has_category = false;
  std::vector<std::pair<HourPoint, double>> rows;
};

}  // namespace

HourPoint parse_timestamp(std::string_view text) {
  using namespace std::chrono;
  text = detail::trim(text);
  // YYYY-MM-DDTHH:MM[:SS]
  if (text.size() < 13 || text[4] != '-' || text[7] != '-' || (text[10] != 'T' && text[10] != ' ')) {
    throw Error(ErrorCode::InputError, "bad timestamp '" + std::string(text) + "'");
  }
  const int y = parse_int(text.substr(0, 4), "year");
  const int mo = parse_int(text.substr(5, 2), "month");
  const int d = parse_int(text.substr(8, 2), "day");
  const int h = parse_int(text.substr(11, 2), "hour");
  int minute = 0;
  int second = 0;
  if (text.size() >= 16) {
    if (text[13] != ':') throw Error(ErrorCode::InputError, "bad timestamp '" + std::string(text) + "'");
    minute = parse_int(text.substr(14, 2), "minute");
    if (text.size() >= 19) second = parse_int(text.substr(17, 2), "second");
  }
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h < 0 || h > 23) {
    throw Error(ErrorCode::InputError, "invalid date in timestamp '" + std::string(text) + "'");
  }
  if (minute != 0 || second != 0) {
    throw Error(ErrorCode::InputError, "timestamp not at hour resolution '" + std::string(text) + "'");
  }
  return HourPoint{sys_days{ymd}} + hours{h};
}

std::string format_timestamp(HourPoint t) {
  using namespace std::chrono;
  const auto day_point = floor<days>(t);
  const year_month_day ymd{day_point};
  const auto hour = (t - day_point).count();
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:00", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(hour));
  return buf;
}

IngestResult parse_readings_csv(std::istream& in, const CategoryTable* metadata) {
  IngestResult result;
  std::string line;
  std::vector<std::string_view> fields;
  std::size_t line_no = 0;

  Columns cols;
  bool have_header = false;
  std::vector<Pending> pending;
  std::unordered_map<std::string, std::size_t> index;

  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    detail::split_fields(line, fields);
    if (!have_header) {
      cols = map_header(fields);
      if (cols.category < 0 && metadata == nullptr) {
        throw Error(ErrorCode::InputError, "no category column and no metadata file");
      }
      have_header = true;
      continue;
    }
    const int needed = std::max({cols.building, cols.category, cols.timestamp, cols.heat});
    if (static_cast<int>(fields.size()) <= needed) {
      throw Error(ErrorCode::InputError, "too few fields" + line_context(line_no));
    }
    const std::string id(fields[static_cast<std::size_t>(cols.building)]);
    if (id.empty()) throw Error(ErrorCode::InputError, "empty building_id" + line_context(line_no));

    auto [it, inserted] = index.try_emplace(id, pending.size());
    if (inserted) pending.push_back(Pending{id, {}, false, {}});
    Pending& p = pending[it->second];

    if (cols.category >= 0) {
      const auto cat_text = fields[static_cast<std::size_t>(cols.category)];
      if (!cat_text.empty()) {
        const auto cat = parse_category(cat_text);
        if (p.has_category && cat != p.category) {
          throw Error(ErrorCode::InputError, "building " + id + " changes category" + line_context(line_no));
        }
        p.category = cat;
        p.has_category = true;
      }
    }

    HourPoint ts;
    try {
      ts = parse_timestamp(fields[static_cast<std::size_t>(cols.timestamp)]);
    } catch (const Error& e) {
      throw Error(ErrorCode::InputError, e.what() + line_context(line_no));
    }

    const auto heat_text = fields[static_cast<std::size_t>(cols.heat)];
    double value = kMissing;
    if (!heat_text.empty()) {
      auto [ptr, ec] = std::from_chars(heat_text.data(), heat_text.data() + heat_text.size(), value);
      if (ec != std::errc{} || ptr != heat_text.data() + heat_text.size() || !std::isfinite(value) ||
          value < 0.0) {
        throw Error(ErrorCode::InputError,
                    "heat_kw must be a finite non-negative number" + line_context(line_no));
      }
    }
    p.rows.emplace_back(ts, value);
  }
  if (!have_header) throw Error(ErrorCode::InputError, "readings file is empty");

  result.series.reserve(pending.size());
  for (auto& p : pending) {
    if (metadata != nullptr) {
      if (auto it = metadata->find(p.id); it != metadata->end()) {
        if (p.has_category && p.category != it->second) {
          throw Error(ErrorCode::InputError, "building " + p.id + " category disagrees with metadata");
        }
        p.category = it->second;
        p.has_category = true;
      }
    }
    if (!p.has_category) throw Error(ErrorCode::InputError, "building " + p.id + " has no category");

    std::stable_sort(p.rows.begin(), p.rows.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    const HourPoint first = p.rows.front().first;
    const HourPoint last = p.rows.back().first;
    const int year = static_cast<int>(std::chrono::year_month_day{std::chrono::floor<std::chrono::days>(first)}.year());
    const int last_year = static_cast<int>(std::chrono::year_month_day{std::chrono::floor<std::chrono::days>(last)}.year());
    if (year != last_year) {
      throw Error(ErrorCode::InputError, "building " + p.id + " spans more than one calendar year");
    }

    RawMeterSeries s;
    s.building_id = p.id;
    s.category = p.category;
    s.year = year;
    s.start = first;
    s.readings.assign(static_cast<std::size_t>((last - first).count()) + 1, kMissing);
    std::vector<bool> seen(s.readings.size(), false);
    std::size_t duplicates = 0;
    for (const auto& [ts, value] : p.rows) {
      const auto slot = static_cast<std::size_t>((ts - first).count());
      if (seen[slot]) {
        ++duplicates;  // repeated clock hour (e.g. daylight saving fall-back): first wins
        continue;
      }
      seen[slot] = true;
      s.readings[slot] = value;
    }
    if (duplicates > 0) {
      result.warnings.push_back("building " + p.id + ": dropped " + std::to_string(duplicates) +
                                " duplicate hour(s)");
    }
    result.series.push_back(std::move(s));
  }
  return result;
}

IngestResult read_readings_csv(const std::filesystem::path& path, const CategoryTable* metadata) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InputError, "cannot open " + path.string());
  return parse_readings_csv(in, metadata);
}

CategoryTable parse_metadata_csv(std::istream& in) {
  CategoryTable table;
  std::string line;
  std::vector<std::string_view> fields;
  bool header = true;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    detail::split_fields(line, fields);
    if (header) {
      header = false;
      if (fields.size() < 2 || fields[0] != "building_id" || fields[1] != "category") {
        throw Error(ErrorCode::InputError, "metadata header must be building_id,category");
      }
      continue;
    }
    if (fields.size() < 2) throw Error(ErrorCode::InputError, "too few fields" + line_context(line_no));
    table[std::string(fields[0])] = parse_category(fields[1]);
  }
  return table;
}

CategoryTable read_metadata_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InputError, "cannot open " + path.string());
  return parse_metadata_csv(in);
}

void write_readings_csv(std::ostream& out, std::span<const RawMeterSeries> series) {
  out << "building_id,category,timestamp,heat_kw\n";
  std::string buf;
  for (const auto& s : series) {
    const std::string prefix = s.building_id + "," + std::string(to_string(s.category)) + ",";
    for (std::size_t i = 0; i < s.readings.size(); ++i) {
      buf = prefix;
      buf += format_timestamp(s.timestamp(i));
      buf += ',';
      if (!is_missing(s.readings[i])) buf += detail::format_number(s.readings[i]);
      buf += '\n';
      out << buf;
    }
  }
}

void write_screening_report(std::ostream& out, std::span<const ScreeningRow> rows) {
  out << "building_id,decision,reason,repaired_count\n";
  for (const auto& r : rows) {
    out << r.building_id << ',' << to_string(r.verdict.decision) << ','
        << (r.verdict.reason ? to_string(*r.verdict.reason) : std::string_view{}) << ','
        << r.verdict.repaired_count << '\n';
  }
}

}  // namespace heatpat
