#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "synthetic_archive.hpp"
#include "whits/catalog_io.hpp"
#include "whits/config.hpp"

using namespace whits;

namespace {

std::filesystem::path temp_dir() {
  auto dir = std::filesystem::temp_directory_path() / "whits_test_config_io";
  std::filesystem::create_directories(dir);
  return dir;
}

void write_text(const std::filesystem::path& p, const std::string& text) { std::ofstream(p) << text; }

SyntheticCatalog small_catalog() {
  SyntheticCatalog cat;
  cat.basin = Basin::WP;
  cat.n_years = 3;
  cat.params.n_years = 3;
  cat.params.seed = 42;
  SyntheticTrack a;
  a.year = 1;
  a.storm_index = 1;
  a.genesis_day_of_year = 365;
  a.lifetime = 9;
  for (int k = 0; k < 10; ++k) a.points.push_back({k, 15.0 + 0.37 * k, 178.0 + 0.61 * k, 30.0 + k / 3.0});
  a.joins = {4};
  SyntheticTrack b = a;
  b.year = 3;
  b.storm_index = 2;
  b.genesis_day_of_year = 200;
  b.joins = {};
  for (auto& p : b.points) p.lon -= 40.0;
  cat.tracks = {a, b};
  return cat;
}

}  // namespace

TEST_CASE("default config carries the standard settings") {
  const auto c = default_config(Basin::EP);
  CHECK(c.basin.basin == Basin::EP);
  CHECK(c.kernel.alpha_dist == 2.0);
  CHECK(c.kernel.alpha_age == 2.0);
  CHECK(c.kernel.alpha_vec == 4.0);
  CHECK(c.kernel.alpha_wind == 4.0);
  CHECK(c.kernel.radius_deg == 2.5);
  CHECK(c.simulation.jump_probability == 0.1);
  CHECK(c.simulation.smoothing_window == 5);
  CHECK(c.diagnostics.n_draws == 100);
  CHECK(c.effective_n_b() == 81);
  CHECK(c.effective_grid() == GridSpec::for_basin(Basin::EP));
}

TEST_CASE("config parsing") {
  const auto c = parse_config(R"({
    "basin": "WP",
    "basin_config": {"record_end_year": 2020, "columns": {"wind": "TOKYO_WIND"}},
    "kernel": {"alpha_vec": 3.0},
    "simulation": {"n_years": 250, "seed": 9, "jump_probability": 0.2},
    "grid": {"cell_deg": 5.0, "lat_min": -10, "lat_max": 60, "lon_min": 100, "lon_max": 200},
    "diagnostics": {"n_b": 40, "n_draws": 11},
    "threads": 3
  })");
  CHECK(c.basin.basin == Basin::WP);
  CHECK(c.basin.record_start_year == 1957);
  CHECK(c.basin.record_end_year == 2020);
  CHECK(c.basin.columns.wind == "TOKYO_WIND");
  CHECK(c.basin.columns.lat == "LAT");
  CHECK(c.kernel.alpha_vec == 3.0);
  CHECK(c.kernel.alpha_dist == 2.0);
  CHECK(c.simulation.n_years == 250);
  CHECK(c.simulation.seed == 9);
  CHECK(c.effective_grid().cell_deg == 5.0);
  CHECK(c.effective_grid().lon_frame == LonFrame::Dateline);
  CHECK(c.effective_n_b() == 40);
  CHECK(c.diagnostics.n_draws == 11);
  CHECK(c.threads == 3);
}

TEST_CASE("config errors") {
  CHECK_THROWS_AS(parse_config("{"), InputError);
  CHECK_THROWS_AS(parse_config("[1]"), InputError);
  CHECK_THROWS_AS(parse_config(R"({"basin": "SA"})"), InputError);
  CHECK_THROWS_AS(parse_config(R"({"kernal": {}})"), InputError);
  CHECK_THROWS_AS(parse_config(R"({"kernel": {"alpha": 1}})"), InputError);
  CHECK_THROWS_AS(parse_config(R"({"kernel": {"alpha_vec": "four"}})"), InputError);
  CHECK_THROWS_AS(parse_config(R"({"basin_config": {"wind_convention": "5min"}})"), InputError);
  CHECK_THROWS_AS(load_config(temp_dir() / "missing.json"), InputError);
}

TEST_CASE("wind convention in config resets the factor") {
  const auto c = parse_config(R"({"basin": "NA", "basin_config": {"wind_convention": "ten_min"}})");
  CHECK(c.basin.wind_convention == WindConvention::TenMinute);
  CHECK(c.basin.conversion_factor == 1.0);
  CHECK_NOTHROW(c.basin.validate());
}

TEST_CASE("config dump round trip") {
  auto c = default_config(Basin::SP);
  c.simulation.n_years = 77;
  c.kernel.radius_deg = 3.0;
  c.diagnostics.seed = 5;
  c.paths.output_dir = "/tmp/out";
  const auto text = dump_config(c);
  const auto path = temp_dir() / "cfg.json";
  write_text(path, text);
  const auto back = load_config(path);
  CHECK(back.basin.basin == Basin::SP);
  CHECK(back.simulation.n_years == 77);
  CHECK(back.kernel == c.kernel);
  CHECK(back.diagnostics.seed == 5);
  CHECK(back.paths.output_dir == "/tmp/out");
  CHECK(back.effective_grid() == c.effective_grid());
  CHECK(back.effective_n_b() == c.effective_n_b());
  CHECK(dump_config(back) == text);
}

TEST_CASE("synthetic timestamps") {
  CHECK(synthetic_timestamp(1, 1, 0) == "0001-01-01T00:00:00");
  CHECK(synthetic_timestamp(1, 1, 1) == "0001-01-01T03:00:00");
  CHECK(synthetic_timestamp(1, 59, 0) == "0001-02-28T00:00:00");
  CHECK(synthetic_timestamp(1, 60, 0) == "0001-03-01T00:00:00");
  CHECK(synthetic_timestamp(12, 365, 7) == "0012-12-31T21:00:00");
  CHECK(synthetic_timestamp(12, 365, 8) == "0013-01-01T00:00:00");
  CHECK(synthetic_timestamp(12345, 200, 0) == "12345-07-19T00:00:00");
}

TEST_CASE("catalog write and read back") {
  const auto cat = small_catalog();
  const auto path = temp_dir() / "catalog.csv";
  const auto sum = write_catalog(cat, path);
  CHECK(sum == file_checksum(path));
  CHECK(std::filesystem::exists(sidecar_path(path)));

  std::ifstream in(path);
  std::string header, first;
  std::getline(in, header);
  std::getline(in, first);
  CHECK(header == "year,storm_index,step_index,timestamp,lat,lon,wind_u10_kt,join_flag");
  CHECK(first.rfind("1,1,0,0001-12-31T00:00:00,15,178,30,0", 0) == 0);

  const auto back = read_catalog(path);
  CHECK(back.n_years == 3);
  CHECK(back.basin == Basin::WP);
  REQUIRE(back.tracks.size() == 2);
  for (std::size_t t = 0; t < 2; ++t) {
    CHECK(back.tracks[t].year == cat.tracks[t].year);
    CHECK(back.tracks[t].storm_index == cat.tracks[t].storm_index);
    REQUIRE(back.tracks[t].points.size() == cat.tracks[t].points.size());
    for (std::size_t k = 0; k < cat.tracks[t].points.size(); ++k) {
      const auto& p = cat.tracks[t].points[k];
      const auto& q = back.tracks[t].points[k];
      CHECK(q.step_index == p.step_index);
      CHECK(q.lat == p.lat);
      CHECK(q.lon == doctest::Approx(p.lon).epsilon(1e-12));
      CHECK(q.wind_u10 == p.wind_u10);
    }
  }

  // Rewriting the same catalog is byte-identical.
  const auto again = temp_dir() / "catalog2.csv";
  CHECK(write_catalog(cat, again) == sum);
}

TEST_CASE("join flags mark join points") {
  const auto cat = small_catalog();
  const auto path = temp_dir() / "joins.csv";
  write_catalog(cat, path);
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  int flagged = 0, row = 0;
  while (std::getline(in, line)) {
    if (line.back() == '1') {
      ++flagged;
      CHECK(row == 4);
    }
    ++row;
  }
  CHECK(flagged == 1);
}

TEST_CASE("external catalogs in the generic layout") {
  const auto path = temp_dir() / "external.csv";
  std::filesystem::remove(sidecar_path(path));
  write_text(path,
             "storm_index,year,lat,lon,wind_u10_kt,step_index,extra\n"
             "1,2,10,179.5,40,0,x\n"
             "1,2,10.5,-179.5,45,1,x\n"
             "2,5,12,100,50,0,y\n");
  const auto c = read_catalog(path);
  CHECK(c.n_years == 5);
  CHECK_FALSE(c.basin);
  REQUIRE(c.tracks.size() == 2);
  CHECK(c.tracks[0].points[1].lon == 180.5);
  CHECK(read_catalog(path, 10).n_years == 10);
  CHECK_THROWS_AS(read_catalog(path, 4), FormatError);
}

TEST_CASE("catalog read errors") {
  const auto path = temp_dir() / "bad.csv";
  std::filesystem::remove(sidecar_path(path));
  write_text(path, "year,storm_index,step_index,lon,wind_u10_kt\n1,1,0,10,20\n");
  try {
    read_catalog(path);
    FAIL("expected a FormatError");
  } catch (const FormatError& e) {
    CHECK(std::string(e.what()).find("'lat'") != std::string::npos);
  }
  write_text(path, "year,storm_index,step_index,lat,lon,wind_u10_kt\n0,1,0,10,20,30\n");
  CHECK_THROWS_AS(read_catalog(path), FormatError);
  write_text(path, "year,storm_index,step_index,lat,lon,wind_u10_kt\n1,1,0,10,20,-3\n");
  CHECK_THROWS_AS(read_catalog(path), FormatError);
  write_text(path, "year,storm_index,step_index,lat,lon,wind_u10_kt\n1,1,0,ten,20,3\n");
  CHECK_THROWS_AS(read_catalog(path), FormatError);
  write_text(path, "");
  CHECK_THROWS_AS(read_catalog(path), FormatError);
  CHECK_THROWS_AS(read_catalog(temp_dir() / "nope.csv"), InputError);
}
