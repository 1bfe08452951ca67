#include <sstream>

#include "doctest.h"
#include "synthetic_archive.hpp"
#include "whits/geo.hpp"
#include "whits/ingest.hpp"

using namespace whits;

namespace {

constexpr const char* kHeader = "SID,SEASON,NUMBER,BASIN,SUBBASIN,NAME,ISO_TIME,NATURE,LAT,LON,WMO_WIND\n";
constexpr const char* kUnits = " ,Year, , , , , , ,degrees_north,degrees_east,kts\n";

ParseResult parse(const std::string& body, Basin basin = Basin::NA) {
  std::istringstream in(std::string(kHeader) + kUnits + body);
  return parse_archive(in, BasinConfig::defaults(basin));
}

RawBestTrackRow row(const char* id, const char* time, double lat, double lon, std::optional<double> wind) {
  RawBestTrackRow r;
  r.storm_id = id;
  r.season = 2000;
  r.basin = Basin::NA;
  r.time_s = *parse_iso_time(time);
  r.lat = lat;
  r.lon = lon;
  r.wmo_wind = wind;
  return r;
}

}  // namespace

TEST_CASE("wind conversion factors") {
  CHECK(convert_wind(100.0, WindConvention::OneMinute) == 88.0);
  CHECK(convert_wind(100.0, WindConvention::ThreeMinute) == 93.0);
  CHECK(convert_wind(50.0, WindConvention::TenMinute) == 50.0);
  CHECK(convert_wind(0.0, WindConvention::OneMinute) == 0.0);
  CHECK_THROWS_AS(convert_wind(-1.0, WindConvention::TenMinute), InputError);
  CHECK(conversion_factor(WindConvention::OneMinute) == 0.88);
  CHECK(conversion_factor(WindConvention::ThreeMinute) == 0.93);
  CHECK(conversion_factor(WindConvention::TenMinute) == 1.0);
}

TEST_CASE("conversion is linear and monotone") {
  for (double w = 0.0; w < 200.0; w += 7.5) {
    CHECK(convert_wind(w + 7.5, WindConvention::OneMinute) > convert_wind(w, WindConvention::OneMinute));
    CHECK(convert_wind(2 * w, WindConvention::ThreeMinute) ==
          doctest::Approx(2 * convert_wind(w, WindConvention::ThreeMinute)));
  }
}

TEST_CASE("basin defaults: record windows, cutoffs and conventions") {
  struct Expected {
    Basin basin;
    int start, cutoff, end;
    WindConvention conv;
    int nb;
  };
  const Expected table[] = {
      {Basin::NA, 1851, 1944, 2025, WindConvention::OneMinute, 82},
      {Basin::EP, 1876, 1945, 2025, WindConvention::OneMinute, 81},
      {Basin::WP, 1957, 1944, 2024, WindConvention::TenMinute, 68},
      {Basin::NI, 1932, 1951, 2024, WindConvention::ThreeMinute, 74},
      {Basin::SI, 1973, 1944, 2025, WindConvention::TenMinute, 53},
      {Basin::SP, 1968, 1968, 2025, WindConvention::TenMinute, 58},
  };
  for (const auto& e : table) {
    CAPTURE(basin_code(e.basin));
    const auto c = BasinConfig::defaults(e.basin);
    CHECK(c.record_start_year == e.start);
    CHECK(c.modern_cutoff_year == e.cutoff);
    CHECK(c.record_end_year == e.end);
    CHECK(c.wind_convention == e.conv);
    CHECK(c.conversion_factor == conversion_factor(e.conv));
    CHECK(c.modern_start_year() == std::max(e.start, e.cutoff));
    CHECK(c.modern_window_years() == e.nb);
    CHECK_NOTHROW(c.validate());
  }
}

TEST_CASE("basin config validation") {
  auto c = BasinConfig::defaults(Basin::NA);
  c.conversion_factor = 0.9;
  CHECK_THROWS_AS(c.validate(), InputError);
  c = BasinConfig::defaults(Basin::NA);
  c.record_end_year = 1800;
  CHECK_THROWS_AS(c.validate(), InputError);
}

TEST_CASE("parse_archive keeps three in-order rows") {
  const auto r = parse(
      "AL1,2000,1,NA,MM,A,2000-08-01 00:00:00,TS,10.0,-50.0,40\n"
      "AL1,2000,1,NA,MM,A,2000-08-01 06:00:00,TS,10.5,-51.0,45\n"
      "AL1,2000,1,NA,MM,A,2000-08-01 12:00:00,TS,11.0,-52.0,50\n");
  REQUIRE(r.rows.size() == 3);
  CHECK(r.rejects.empty());
  CHECK(r.rows[0].lat == 10.0);
  CHECK(r.rows[1].lon == -51.0);
  CHECK(*r.rows[2].wmo_wind == 50.0);
  CHECK(r.rows[2].line == 5);
  CHECK(r.rows[1].time_s - r.rows[0].time_s == 6 * 3600);
}

TEST_CASE("parse_archive filters basin and record window") {
  const auto r = parse(
      "AL1,2000,1,NA,MM,A,2000-08-01 00:00:00,TS,10.0,-50.0,40\n"
      "SP1,2000,1,SP,MM,A,2000-02-01 00:00:00,TS,-15.0,170.0,40\n"
      "AL0,1850,1,NA,MM,A,1850-08-01 00:00:00,TS,10.0,-50.0,40\n"
      "AL9,2026,1,NA,MM,A,2026-08-01 00:00:00,TS,10.0,-50.0,40\n");
  REQUIRE(r.rows.size() == 1);
  CHECK(r.rows[0].storm_id == "AL1");
  CHECK(r.skipped_other_basin == 1);
  CHECK(r.skipped_out_of_window == 2);
}

TEST_CASE("parse_archive rejects bad rows with line numbers") {
  const auto r = parse(
      "AL1,2000,1,NA,MM,A,2000-08-01 00:00:00,TS,999,-50.0,40\n"
      "AL1,2000,1,NA,MM,A,garbage,TS,10.0,-50.0,40\n"
      "AL1,2000,1,NA,MM,A,2000-08-01 06:00:00,TS,,-50.0,40\n"
      "AL1,2000,1,NA,MM,A,2000-08-01 09:00:00,TS,10.0,-400.0,40\n"
      "AL1,2000,1,NA,MM,A,2000-08-01 12:00:00,TS,10.0,-50.0,4x\n"
      "AL1,2000,1,NA\n"
      "AL1,20x0,1,NA,MM,A,2000-08-01 12:00:00,TS,10.0,-50.0,40\n"
      "AL1,2000,1,NA,MM,A,2000-08-01 18:00:00,TS,10.0,-50.0,40\n"
      "AL1,2000,1,NA,MM,A,2000-08-01 18:00:00,TS,10.5,-50.5,45\n");
  REQUIRE(r.rejects.size() == 8);
  const std::size_t lines[] = {3, 4, 5, 6, 7, 8, 9, 11};
  for (std::size_t i = 0; i < 8; ++i) CHECK(r.rejects[i].line == lines[i]);
  CHECK(r.rejects[0].reason.find("latitude") != std::string::npos);
  CHECK(r.rejects[7].reason.find("duplicate") != std::string::npos);
  REQUIRE(r.rows.size() == 1);
  CHECK(r.rows[0].line == 10);
}

TEST_CASE("parse_archive sorts by storm and time and treats blanks as missing wind") {
  const auto r = parse(
      "B,2000,1,NA,MM,A,2000-08-01 06:00:00,TS,10.0,-50.0, \n"
      "A,2000,1,NA,MM,A,2000-08-02 00:00:00,TS,10.0,-50.0,30\n"
      "B,2000,1,NA,MM,A,2000-08-01 00:00:00,TS,10.0,-50.0,-1\n"
      "A,2000,1,NA,MM,A,2000-08-01 00:00:00,TS,10.0,-50.0,30\n");
  REQUIRE(r.rows.size() == 4);
  CHECK(r.rows[0].storm_id == "A");
  CHECK(r.rows[0].time_s < r.rows[1].time_s);
  CHECK(r.rows[2].storm_id == "B");
  CHECK(r.rows[2].time_s < r.rows[3].time_s);
  CHECK_FALSE(r.rows[2].wmo_wind.has_value());
  CHECK_FALSE(r.rows[3].wmo_wind.has_value());
}

TEST_CASE("parse_archive normalizes longitudes and errors on missing columns") {
  const auto r = parse("AL1,2000,1,NA,MM,A,2000-08-01 00:00:00,TS,10.0,270.0,40\n");
  REQUIRE(r.rows.size() == 1);
  CHECK(r.rows[0].lon == -90.0);
  std::istringstream bad("SID,SEASON,BASIN,ISO_TIME,LAT,LON\n");
  CHECK_THROWS_AS(parse_archive(bad, BasinConfig::defaults(Basin::NA)), InputError);
  CHECK_THROWS_AS(parse_archive(std::filesystem::path("/nonexistent/archive.csv"), BasinConfig::defaults(Basin::NA)),
                  InputError);
}

TEST_CASE("custom column mapping") {
  auto cfg = BasinConfig::defaults(Basin::NA);
  cfg.columns.wind = "USA_WIND";
  std::istringstream in(
      "SID,SEASON,BASIN,ISO_TIME,LAT,LON,WMO_WIND,USA_WIND\n"
      "AL1,2000,NA,2000-08-01 00:00:00,10,-50,,65\n");
  const auto r = parse_archive(in, cfg);
  REQUIRE(r.rows.size() == 1);
  CHECK(*r.rows[0].wmo_wind == 65.0);
}

TEST_CASE("iso time parsing") {
  CHECK(parse_iso_time("1970-01-01 00:00:00") == 0);
  CHECK(parse_iso_time("2000-03-01T12:00") == 951912000);
  CHECK(parse_iso_time("2000-02-29 00:00:00") == 951782400);
  CHECK_FALSE(parse_iso_time("2001-02-29 00:00:00"));
  CHECK_FALSE(parse_iso_time("2000-01-01 25:00:00"));
  CHECK_FALSE(parse_iso_time("nonsense"));
}

TEST_CASE("interpolation inserts the linear midpoint") {
  const std::vector rows{row("A", "2000-08-01 00:00:00", 10, -50, 40), row("A", "2000-08-01 06:00:00", 12, -50, 50)};
  const auto t = interpolate_track(rows);
  REQUIRE(t.points.size() == 3);
  CHECK(t.points[1].lat == 11.0);
  CHECK(t.points[1].wind_u10 == 45.0);
  CHECK(t.points[2].lat == 12.0);
  CHECK_FALSE(t.wind_filled);
  CHECK_FALSE(t.wind_converted);
  for (int k = 0; k < 3; ++k) CHECK(t.points[static_cast<std::size_t>(k)].step_index == k);
}

TEST_CASE("interpolation leaves 3-hourly rows unchanged") {
  const std::vector rows{row("A", "2000-08-01 00:00:00", 10, -50, 40), row("A", "2000-08-01 03:00:00", 10.3, -50.7, 41),
                         row("A", "2000-08-01 06:00:00", 10.9, -51.1, 47)};
  const auto t = interpolate_track(rows);
  REQUIRE(t.points.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(t.points[i].lat == rows[i].lat);
    CHECK(t.points[i].lon == rows[i].lon);
    CHECK(t.points[i].wind_u10 == *rows[i].wmo_wind);
  }
}

TEST_CASE("interpolation across the antimeridian follows the short arc") {
  const std::vector rows{row("A", "2000-08-01 00:00:00", 20, 179.5, 40), row("A", "2000-08-01 06:00:00", 20, -179.5, 40)};
  const auto t = interpolate_track(rows);
  REQUIRE(t.points.size() == 3);
  CHECK(t.points[1].lon == 180.0);
  CHECK(wrap_lon(t.points[1].lon) == 180.0);
  CHECK(t.points[2].lon == 180.5);
  CHECK(wrap_lon(t.points[2].lon) == -179.5);
}

TEST_CASE("missing winds: ends dropped, interior filled and flagged") {
  const std::vector rows{row("A", "2000-08-01 00:00:00", 9, -50, std::nullopt),
                         row("A", "2000-08-01 06:00:00", 10, -50, 40),
                         row("A", "2000-08-01 12:00:00", 11, -50, std::nullopt),
                         row("A", "2000-08-01 18:00:00", 12, -50, std::nullopt),
                         row("A", "2000-08-02 00:00:00", 13, -50, 70),
                         row("A", "2000-08-02 06:00:00", 14, -50, std::nullopt)};
  const auto t = interpolate_track(rows);
  CHECK(t.wind_filled);
  REQUIRE(t.points.size() == 7);
  CHECK(t.points[0].lat == 10.0);
  CHECK(t.points[6].lat == 13.0);
  CHECK(t.points[2].wind_u10 == 50.0);
  CHECK(t.points[4].wind_u10 == 60.0);
  CHECK(t.points[3].wind_u10 == 55.0);
}

TEST_CASE("interpolation errors") {
  CHECK_THROWS_AS(interpolate_track(std::vector{row("A", "2000-08-01 00:00:00", 10, -50, 40)}), InputError);
  CHECK_THROWS_AS(interpolate_track(std::vector{row("A", "2000-08-01 00:00:00", 10, -50, 40),
                                                row("A", "2000-08-01 06:00:00", 10, -50, std::nullopt)}),
                  InputError);
  CHECK_THROWS_AS(interpolate_track(std::vector{row("A", "2000-08-01 06:00:00", 10, -50, 40),
                                                row("A", "2000-08-01 00:00:00", 10, -50, 40)}),
                  InputError);
}

TEST_CASE("point count is 1 + round(duration / 3 h)") {
  const char* ends[] = {"2000-08-01 07:00:00", "2000-08-01 08:00:00", "2000-08-01 04:29:00", "2000-08-01 04:31:00"};
  const std::size_t expected[] = {3, 4, 2, 3};
  for (int i = 0; i < 4; ++i) {
    const auto t = interpolate_track(std::vector{row("A", "2000-08-01 00:00:00", 10, -50, 40), row("A", ends[i], 12, -50, 50)});
    CHECK(t.points.size() == expected[i]);
    CHECK(t.points.back().lat <= 12.0);
  }
  // Rounding up past the last row holds the last observation.
  const auto t = interpolate_track(std::vector{row("A", "2000-08-01 00:00:00", 10, -50, 40), row("A", "2000-08-01 08:00:00", 12, -50, 50)});
  CHECK(t.points[3].lat == 12.0);
  CHECK(t.points[3].wind_u10 == 50.0);
}

TEST_CASE("genesis year comes from the season, genesis day from the first row") {
  auto a = row("A", "2000-12-31 18:00:00", 10, -50, 40);
  auto b = row("A", "2001-01-01 00:00:00", 11, -50, 40);
  a.season = b.season = 2001;
  const auto t = interpolate_track(std::vector{a, b});
  CHECK(t.genesis_year == 2001);
  CHECK(t.genesis_day_of_year == 366);
}

TEST_CASE("conversion is applied exactly once") {
  auto t = interpolate_track(std::vector{row("A", "2000-08-01 00:00:00", 10, -50, 100), row("A", "2000-08-01 03:00:00", 10, -50, 50)});
  convert_track_winds(t, WindConvention::OneMinute);
  CHECK(t.points[0].wind_u10 == 88.0);
  CHECK(t.wind_converted);
  CHECK_THROWS_AS(convert_track_winds(t, WindConvention::OneMinute), InvariantError);
}

TEST_CASE("assemble_tracks drops short storms and is thread-count independent") {
  testing::ArchiveOptions o;
  o.first_year = 1990;
  o.last_year = 2000;
  o.bad_rows = true;
  std::istringstream in(testing::synthetic_archive(o));
  auto parsed = parse_archive(in, BasinConfig::defaults(Basin::NI));
  CHECK(parsed.rejects.size() == 3);
  parsed.rows.push_back(parsed.rows.back());
  parsed.rows.back().storm_id = "ZZZ_SINGLE";
  const auto one = assemble_tracks(parsed.rows, BasinConfig::defaults(Basin::NI), 1);
  const auto four = assemble_tracks(parsed.rows, BasinConfig::defaults(Basin::NI), 4);
  REQUIRE(one.dropped.size() == 1);
  CHECK(one.dropped[0].storm_id == "ZZZ_SINGLE");
  REQUIRE(one.tracks.size() == four.tracks.size());
  for (std::size_t i = 0; i < one.tracks.size(); ++i) {
    CHECK(one.tracks[i].storm_id == four.tracks[i].storm_id);
    CHECK(one.tracks[i].points == four.tracks[i].points);
    CHECK(one.tracks[i].wind_converted);
    if (i > 0) CHECK(one.tracks[i - 1].storm_id < one.tracks[i].storm_id);
  }
}

TEST_CASE("every interpolated track is on a consecutive 3-h grid") {
  testing::ArchiveOptions o;
  o.first_year = 1960;
  o.last_year = 2000;
  std::istringstream in(testing::synthetic_archive(o));
  const auto parsed = parse_archive(in, BasinConfig::defaults(Basin::NI));
  const auto set = assemble_tracks(parsed.rows, BasinConfig::defaults(Basin::NI));
  CHECK(set.tracks.size() > 100);
  for (const auto& t : set.tracks) {
    REQUIRE(t.points.size() >= 2);
    for (std::size_t k = 0; k < t.points.size(); ++k) {
      CHECK(t.points[k].step_index == static_cast<int>(k));
      CHECK(t.points[k].wind_u10 >= 0.0);
    }
  }
}
