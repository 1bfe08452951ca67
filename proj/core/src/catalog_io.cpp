#include "whits/catalog_io.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <fstream>
#include <map>

#include "csv.hpp"
#include "json.hpp"
#include "serialization.hpp"
#include "whits/geo.hpp"

namespace whits {

using nlohmann::json;

namespace {

constexpr std::array<int, 12> kMonthDays{31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};

json params_json(const SimulationParams& p) {
  return {{"n_years", p.n_years},
          {"seed", p.seed},
          {"jump_probability", p.jump_probability},
          {"smoothing_window", p.smoothing_window},
          {"reserved_steps", p.reserved_steps}};
}

json stats_json(const CatalogStats& s) {
  return {{"tracks", s.tracks},
          {"points", s.points},
          {"joins", s.joins},
          {"forced_joins", s.forced_joins},
          {"early_terminations", s.early_terminations},
          {"widened_starts", s.widened_starts},
          {"latitude_rejections", s.latitude_rejections},
          {"dead_end_rejections", s.dead_end_rejections}};
}

}  // namespace

std::string synthetic_timestamp(int year, int genesis_day_of_year, int step_index) {
  const long long hours = static_cast<long long>(std::clamp(genesis_day_of_year, 1, 366) - 1) * 24 +
                          static_cast<long long>(step_index) * 3;
  long long day = hours / 24;
  const int hour = static_cast<int>(hours % 24);
  const long long y = year + day / 365;
  day %= 365;
  int month = 0;
  while (day >= kMonthDays[static_cast<std::size_t>(month)]) day -= kMonthDays[static_cast<std::size_t>(month++)];
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%04lld-%02d-%02lldT%02d:00:00", y, month + 1, day + 1, hour);
  return buf;
}

std::filesystem::path sidecar_path(const std::filesystem::path& csv_path) {
  auto p = csv_path;
  p += ".json";
  return p;
}

std::uint64_t write_catalog(const SyntheticCatalog& catalog, const std::filesystem::path& csv_path) {
  std::string text = "year,storm_index,step_index,timestamp,lat,lon,wind_u10_kt,join_flag\n";
  for (const auto& track : catalog.tracks) {
    std::size_t next_join = 0;
    for (const auto& p : track.points) {
      bool join = false;
      if (next_join < track.joins.size() && track.joins[next_join] == p.step_index) {
        join = true;
        ++next_join;
      }
      text += std::to_string(track.year);
      text += ',';
      text += std::to_string(track.storm_index);
      text += ',';
      text += std::to_string(p.step_index);
      text += ',';
      text += synthetic_timestamp(track.year, track.genesis_day_of_year, p.step_index);
      text += ',';
      text += detail::format_double(p.lat);
      text += ',';
      text += detail::format_double(wrap_lon(p.lon));
      text += ',';
      text += detail::format_double(p.wind_u10);
      text += join ? ",1\n" : ",0\n";
    }
  }
  detail::write_file_atomic(csv_path, text);
  const auto csv_checksum = detail::fnv1a(text.data(), text.size());

  json meta = {{"format", "whits-catalog"},
               {"schema_version", 1},
               {"generator_version", catalog.generator_version},
               {"basin", std::string(basin_code(catalog.basin))},
               {"n_years", catalog.n_years},
               {"params", params_json(catalog.params)},
               {"reserved_steps", catalog.reserved_steps},
               {"library_checksum", detail::hex64(catalog.library_checksum)},
               {"table_checksum", detail::hex64(catalog.table_checksum)},
               {"csv_checksum", detail::hex64(csv_checksum)},
               {"stats", stats_json(catalog.stats)},
               {"columns", {"year", "storm_index", "step_index", "timestamp", "lat", "lon", "wind_u10_kt", "join_flag"}}};
  detail::write_file_atomic(sidecar_path(csv_path), meta.dump(2) + "\n");
  return csv_checksum;
}

void write_provenance(const SyntheticCatalog& catalog, const SegmentLibrary& library,
                      const std::filesystem::path& path) {
  json tracks = json::array();
  for (const auto& t : catalog.tracks) {
    json segments = json::array();
    for (const auto& s : t.segments) {
      segments.push_back({{"storm_id", library.track(s.source.track).storm_id},
                          {"source_track", s.source.track},
                          {"source_start_step", s.source.step},
                          {"source_end_step", s.source_end_step},
                          {"synthetic_start", s.synthetic_start},
                          {"anchor_lat", s.anchor.lat},
                          {"anchor_lon", s.anchor.lon},
                          {"forced", s.forced}});
    }
    tracks.push_back({{"year", t.year},
                      {"storm_index", t.storm_index},
                      {"lifetime", t.lifetime},
                      {"early_terminated", t.early_terminated},
                      {"joins", t.joins},
                      {"segments", std::move(segments)}});
  }
  json doc = {{"format", "whits-provenance"},
              {"schema_version", 1},
              {"library_checksum", detail::hex64(catalog.library_checksum)},
              {"tracks", std::move(tracks)}};
  detail::write_file_atomic(path, doc.dump(1) + "\n");
}

LoadedCatalog read_catalog(const std::filesystem::path& csv_path, std::optional<int> n_years_override) {
  std::ifstream in(csv_path);
  if (!in) throw InputError("cannot open catalog " + csv_path.string());
  const std::string what = "catalog " + csv_path.string();
  std::string line;
  if (!std::getline(in, line)) throw FormatError(what + ": empty file");
  const auto header = detail::split_csv_line(line);
  auto column = [&](const char* name) {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (detail::trim(header[i]) == name) return i;
    }
    throw FormatError(what + ": missing column '" + std::string(name) + "'");
  };
  const std::size_t c_year = column("year"), c_storm = column("storm_index"), c_step = column("step_index"),
                    c_lat = column("lat"), c_lon = column("lon"), c_wind = column("wind_u10_kt");
  const std::size_t needed = std::max({c_year, c_storm, c_step, c_lat, c_lon, c_wind}) + 1;

  LoadedCatalog out;
  std::map<std::pair<int, int>, std::size_t> slot;
  int max_year = 0;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto f = detail::split_csv_line(line);
    auto fail = [&](const std::string& msg) {
      throw FormatError(what + ": line " + std::to_string(line_no) + ": " + msg);
    };
    if (f.size() < needed) fail("too few fields");
    const auto year = detail::parse_number<int>(f[c_year]);
    const auto storm = detail::parse_number<int>(f[c_storm]);
    const auto stepi = detail::parse_number<int>(f[c_step]);
    const auto lat = detail::parse_number<double>(f[c_lat]);
    const auto lon = detail::parse_number<double>(f[c_lon]);
    const auto wind = detail::parse_number<double>(f[c_wind]);
    if (!year || !storm || !stepi || !lat || !lon || !wind) fail("malformed value");
    if (*year < 1) fail("year labels must start at 1");
    if (*wind < 0.0) fail("negative wind");
    max_year = std::max(max_year, *year);
    auto [it, inserted] = slot.try_emplace({*year, *storm}, out.tracks.size());
    if (inserted) out.tracks.push_back({*year, *storm, {}});
    auto& points = out.tracks[it->second].points;
    const double unwrapped = points.empty() ? wrap_lon(*lon) : unwrap_lon(points.back().lon, *lon);
    points.push_back({*stepi, *lat, unwrapped, *wind});
  }

  const auto meta_path = sidecar_path(csv_path);
  std::optional<int> meta_years;
  if (std::filesystem::exists(meta_path)) {
    std::ifstream meta_in(meta_path);
    try {
      const auto meta = json::parse(meta_in);
      if (meta.contains("n_years")) meta_years = meta.at("n_years").get<int>();
      if (meta.contains("basin")) out.basin = parse_basin(meta.at("basin").get<std::string>());
    } catch (const json::exception& e) {
      throw FormatError(what + ": bad sidecar: " + e.what());
    }
  }
  out.n_years = meta_years ? *meta_years : n_years_override ? *n_years_override : max_year;
  if (max_year > out.n_years) {
    throw FormatError(what + ": year label " + std::to_string(max_year) + " exceeds n_years " +
                      std::to_string(out.n_years));
  }
  return out;
}

std::uint64_t file_checksum(const std::filesystem::path& path) {
  const auto bytes = detail::read_file(path);
  return detail::fnv1a(bytes.data(), bytes.size());
}

}  // namespace whits
