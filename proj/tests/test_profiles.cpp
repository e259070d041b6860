#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "heatpat/error.hpp"
#include "heatpat/profiles.hpp"
#include "heatpat/synthetic.hpp"
#include "oracles.hpp"

using namespace heatpat;
using namespace std::chrono;

namespace {

RawMeterSeries random_year(int year, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(1.0, 30.0);
  RawMeterSeries s;
  s.building_id = "R";
  s.year = year;
  s.start = year_start(year);
  s.readings.resize(static_cast<std::size_t>(hours_in_year(year)));
  for (double& v : s.readings) v = u(rng);
  return s;
}

}  // namespace

TEST_CASE("partitions") {
  const auto four = SeasonPartition::four_season();
  CHECK(four.profile_length() == 672);
  CHECK(four.season_of_month(12) == 0);
  CHECK(four.season_of_month(5) == 2);
  CHECK(four.season_of_month(9) == 2);
  CHECK(four.season_of_month(7) == 3);
  const auto three = SeasonPartition::three_season();
  CHECK(three.profile_length() == 504);
  CHECK(three.season_of_month(5) == 2);
  CHECK(SeasonPartition::from_id("3-season").id == "3-season");
  CHECK_THROWS_AS(SeasonPartition::from_id("5-season"), Error);
}

TEST_CASE("hour-of-week pattern is recovered exactly") {
  // 2018 starts on a Monday.
  RawMeterSeries s;
  s.building_id = "P";
  s.year = 2018;
  s.start = year_start(2018);
  s.readings.resize(8760);
  for (std::size_t i = 0; i < s.readings.size(); ++i) s.readings[i] = static_cast<double>(i % 168);
  const auto p = extract_profile(s, SeasonPartition::four_season());
  for (const auto& block : p.seasonal) {
    for (std::size_t h = 0; h < 168; ++h) CHECK(block[h] == doctest::Approx(static_cast<double>(h)));
  }
}

TEST_CASE("each season block holds the mean of its weeks") {
  for (int year : {2015, 2016, 2018}) {
    const auto s = random_year(year, static_cast<std::uint64_t>(year));
    const auto part = SeasonPartition::four_season();
    const auto p = extract_profile(s, part);

    // oracle: walk every Monday, take weeks that fit, bucket by Thursday's month
    std::vector<double> energy(4, 0.0);
    std::vector<int> weeks(4, 0);
    for (std::size_t i = 0; i + 168 <= s.readings.size(); ++i) {
      const auto t = s.timestamp(i);
      const auto day = floor<days>(t);
      if (t != HourPoint{day} || weekday{day} != Monday) continue;
      const year_month_day thu{day + days{3}};
      const auto season = static_cast<std::size_t>(part.season_of_month(static_cast<unsigned>(thu.month())));
      for (std::size_t h = 0; h < 168; ++h) energy[season] += s.readings[i + h];
      ++weeks[season];
    }
    for (std::size_t season = 0; season < 4; ++season) {
      CHECK(p.weeks_used[season] == weeks[season]);
      double sum = 0.0;
      for (double a : p.seasonal[season]) sum += a;
      CHECK(sum * weeks[season] == doctest::Approx(energy[season]).epsilon(1e-6));
    }
    int total = 0;
    for (int w : p.weeks_used) total += w;
    CHECK(total == (year == 2018 ? 52 : 51));
  }
}

TEST_CASE("gaps and empty seasons are errors") {
  auto s = random_year(2015, 1);
  s.readings[40] = kMissing;
  CHECK_THROWS_AS(extract_profile(s, SeasonPartition::four_season()), Error);

  auto winter_only = random_year(2015, 2);
  winter_only.readings.resize(24 * 60);
  try {
    extract_profile(winter_only, SeasonPartition::four_season());
    FAIL("expected EmptySeason");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptySeason);
  }
}

TEST_CASE("z-normalisation against the mean/std oracle") {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 20; ++t) {
    auto x = oracle::random_vector(rng, 50 + static_cast<std::size_t>(t));
    for (double& v : x) v = 3.0 * v + 7.0;
    const auto z = z_normalize(x);
    const double m = oracle::mean(x);
    const double sd = oracle::population_std(x);
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(z[i] == doctest::Approx((x[i] - m) / sd).epsilon(1e-12));
    CHECK(oracle::mean(z) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(oracle::population_std(z) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("constant profiles are degenerate") {
  std::vector<double> flat(672, 4.0);
  try {
    z_normalize(flat);
    FAIL("expected DegenerateProfile");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DegenerateProfile);
  }
  flat[3] = 4.0 + 1e-9;
  CHECK_THROWS_AS(z_normalize(flat), Error);
}

TEST_CASE("normalisation is scale and offset invariant") {
  const auto part = SeasonPartition::four_season();
  auto s = random_year(2016, 9);
  const auto a = normalize(extract_profile(s, part), part);
  for (double& v : s.readings) v = 2.5 * v + 40.0;
  const auto b = normalize(extract_profile(s, part), part);
  for (std::size_t i = 0; i < a.z.size(); ++i) CHECK(a.z[i] == doctest::Approx(b.z[i]).epsilon(1e-9));
}

TEST_CASE("deconcatenate inverts concatenate") {
  const auto part = SeasonPartition::three_season();
  std::vector<double> z(part.profile_length());
  for (std::size_t i = 0; i < z.size(); ++i) z[i] = static_cast<double>(i);
  const auto blocks = deconcatenate(z, part);
  REQUIRE(blocks.size() == 3);
  HeatLoadProfile p;
  p.seasonal = blocks;
  CHECK(concatenate(p) == z);
  CHECK_THROWS_AS(deconcatenate(std::span(z).first(100), part), Error);
}

TEST_CASE("zero-noise synthetic buildings of one archetype normalise identically") {
  SyntheticSpec spec;
  spec.counts = {3, 3, 3, 3};
  spec.noise = 0.0;
  const auto data = generate_synthetic(spec);
  const auto part = SeasonPartition::four_season();
  std::vector<std::vector<double>> first(4);
  for (std::size_t i = 0; i < data.series.size(); ++i) {
    const auto z = normalize(extract_profile(data.series[i], part), part).z;
    auto& ref = first[static_cast<std::size_t>(data.truth[i].archetype)];
    if (ref.empty()) {
      ref = z;
      continue;
    }
    double worst = 0.0;
    for (std::size_t j = 0; j < z.size(); ++j) worst = std::max(worst, std::abs(z[j] - ref[j]));
    CHECK(worst < 1e-9);
  }
}
