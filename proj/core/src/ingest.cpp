#include "whits/ingest.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <istream>
#include <tuple>
#include <unordered_map>

#include "csv.hpp"
#include "parallel.hpp"
#include "serialization.hpp"
#include "whits/geo.hpp"

namespace whits {

using detail::parse_number;
using detail::trim;

BasinConfig BasinConfig::defaults(Basin basin) {
  BasinConfig c;
  c.basin = basin;
  switch (basin) {
    case Basin::NA:
      c.record_start_year = 1851, c.modern_cutoff_year = 1944, c.record_end_year = 2025;
      c.wind_convention = WindConvention::OneMinute;
      break;
    case Basin::EP:
      c.record_start_year = 1876, c.modern_cutoff_year = 1945, c.record_end_year = 2025;
      c.wind_convention = WindConvention::OneMinute;
      break;
    case Basin::WP:
      c.record_start_year = 1957, c.modern_cutoff_year = 1944, c.record_end_year = 2024;
      c.wind_convention = WindConvention::TenMinute;
      break;
    case Basin::NI:
      c.record_start_year = 1932, c.modern_cutoff_year = 1951, c.record_end_year = 2024;
      c.wind_convention = WindConvention::ThreeMinute;
      break;
    case Basin::SI:
      c.record_start_year = 1973, c.modern_cutoff_year = 1944, c.record_end_year = 2025;
      c.wind_convention = WindConvention::TenMinute;
      break;
    case Basin::SP:
      c.record_start_year = 1968, c.modern_cutoff_year = 1968, c.record_end_year = 2025;
      c.wind_convention = WindConvention::TenMinute;
      break;
  }
  c.conversion_factor = whits::conversion_factor(c.wind_convention);
  return c;
}

int BasinConfig::modern_start_year() const { return std::max(record_start_year, modern_cutoff_year); }

int BasinConfig::modern_window_years() const { return record_end_year - modern_start_year() + 1; }

void BasinConfig::validate() const {
  if (record_end_year < record_start_year) throw InputError("record_end_year precedes record_start_year");
  if (modern_start_year() > record_end_year) throw InputError("modern observing window is empty");
  if (conversion_factor != whits::conversion_factor(wind_convention)) {
    throw InputError("conversion_factor does not match wind convention " +
                     std::string(convention_name(wind_convention)));
  }
}

double conversion_factor(WindConvention convention) {
  switch (convention) {
    case WindConvention::OneMinute: return 0.88;
    case WindConvention::ThreeMinute: return 0.93;
    case WindConvention::TenMinute: return 1.0;
  }
  return 1.0;
}

double convert_wind(double knots, WindConvention convention) {
  if (!(knots >= 0.0)) throw InputError("wind speed must be non-negative");
  return knots * conversion_factor(convention);
}

std::optional<std::int64_t> parse_iso_time(std::string_view text) {
  text = trim(text);
  if (text.size() < 16) return std::nullopt;
  auto num = [&](std::size_t pos, std::size_t len) { return parse_number<int>(text.substr(pos, len)); };
  if (text[4] != '-' || text[7] != '-' || (text[10] != ' ' && text[10] != 'T') || text[13] != ':') {
    return std::nullopt;
  }
  auto y = num(0, 4), mo = num(5, 2), d = num(8, 2), h = num(11, 2), mi = num(14, 2);
  std::optional<int> s = 0;
  if (text.size() >= 19) {
    if (text[16] != ':') return std::nullopt;
    s = num(17, 2);
  } else if (text.size() != 16) {
    return std::nullopt;
  }
  if (!y || !mo || !d || !h || !mi || !s) return std::nullopt;
  using namespace std::chrono;
  const year_month_day ymd{year{*y}, month{static_cast<unsigned>(*mo)}, day{static_cast<unsigned>(*d)}};
  if (!ymd.ok() || *h > 23 || *mi > 59 || *s > 60) return std::nullopt;
  const auto days = sys_days{ymd}.time_since_epoch().count();
  return static_cast<std::int64_t>(days) * 86400 + *h * 3600 + *mi * 60 + *s;
}

namespace {

int day_of_year(std::int64_t time_s) {
  using namespace std::chrono;
  const sys_days day{days{static_cast<int>(std::floor(static_cast<double>(time_s) / 86400.0))}};
  const year_month_day ymd{day};
  return (day - sys_days{ymd.year() / January / 1}).count() + 1;
}

struct ColumnIndex {
  std::size_t storm_id, season, basin, iso_time, lat, lon, wind;
  std::size_t max() const { return std::max({storm_id, season, basin, iso_time, lat, lon, wind}); }
};

ColumnIndex resolve_columns(const std::vector<std::string>& header, const ColumnMap& map) {
  auto find = [&](const std::string& name) {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (trim(header[i]) == name) return i;
    }
    throw InputError("archive header lacks column '" + name + "'");
  };
  return {find(map.storm_id), find(map.season), find(map.basin), find(map.iso_time),
          find(map.lat),      find(map.lon),    find(map.wind)};
}

}  // namespace

ParseResult parse_archive(std::istream& in, const BasinConfig& config) {
  ParseResult result;
  std::string line;
  if (!std::getline(in, line)) throw InputError("archive is empty");
  if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line.erase(0, 3);
  const auto columns = resolve_columns(detail::split_csv_line(line), config.columns);
  const std::string_view wanted = basin_code(config.basin);

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto f = detail::split_csv_line(line);
    auto reject = [&](std::string reason) { result.rejects.push_back({line_no, std::move(reason)}); };
    if (f.size() <= columns.max()) {
      reject("expected at least " + std::to_string(columns.max() + 1) + " fields, found " +
             std::to_string(f.size()));
      continue;
    }
    const auto season = parse_number<int>(f[columns.season]);
    if (!season) {
      // IBTrACS ships a units row right under the header.
      if (line_no == 2 && !parse_number<double>(f[columns.lat])) continue;
      reject("malformed season '" + std::string(trim(f[columns.season])) + "'");
      continue;
    }
    if (trim(f[columns.basin]) != wanted) {
      ++result.skipped_other_basin;
      continue;
    }
    if (*season < config.record_start_year || *season > config.record_end_year) {
      ++result.skipped_out_of_window;
      continue;
    }
    RawBestTrackRow row;
    row.storm_id = std::string(trim(f[columns.storm_id]));
    if (row.storm_id.empty()) {
      reject("missing storm id");
      continue;
    }
    row.season = *season;
    row.basin = config.basin;
    row.line = line_no;
    const auto t = parse_iso_time(f[columns.iso_time]);
    if (!t) {
      reject("malformed time '" + std::string(trim(f[columns.iso_time])) + "'");
      continue;
    }
    row.time_s = *t;
    const auto lat_text = trim(f[columns.lat]);
    const auto lon_text = trim(f[columns.lon]);
    if (lat_text.empty() || lon_text.empty()) {
      reject("missing position");
      continue;
    }
    const auto lat = parse_number<double>(lat_text);
    const auto lon = parse_number<double>(lon_text);
    if (!lat || !lon) {
      reject("malformed position");
      continue;
    }
    if (!(std::abs(*lat) <= 90.0)) {
      reject("latitude out of range: " + std::string(lat_text));
      continue;
    }
    if (!(*lon >= -180.0 && *lon <= 360.0)) {
      reject("longitude out of range: " + std::string(lon_text));
      continue;
    }
    row.lat = *lat;
    row.lon = wrap_lon(*lon);
    const auto wind_text = trim(f[columns.wind]);
    if (!wind_text.empty()) {
      const auto wind = parse_number<double>(wind_text);
      if (!wind) {
        reject("malformed wind '" + std::string(wind_text) + "'");
        continue;
      }
      if (*wind >= 0.0) row.wmo_wind = *wind;  // negative values are missing-data sentinels
    }
    result.rows.push_back(std::move(row));
  }
  if (in.bad()) throw InputError("error while reading archive");

  std::stable_sort(result.rows.begin(), result.rows.end(), [](const auto& a, const auto& b) {
    return std::tie(a.storm_id, a.time_s) < std::tie(b.storm_id, b.time_s);
  });
  std::vector<RawBestTrackRow> unique;
  unique.reserve(result.rows.size());
  for (auto& row : result.rows) {
    if (!unique.empty() && unique.back().storm_id == row.storm_id && unique.back().time_s == row.time_s) {
      result.rejects.push_back({row.line, "duplicate time for storm " + row.storm_id});
      continue;
    }
    unique.push_back(std::move(row));
  }
  result.rows = std::move(unique);
  std::sort(result.rejects.begin(), result.rejects.end(),
            [](const auto& a, const auto& b) { return a.line < b.line; });
  return result;
}

ParseResult parse_archive(const std::filesystem::path& path, const BasinConfig& config) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open archive " + path.string());
  return parse_archive(in, config);
}

HistoricalTrack interpolate_track(std::span<const RawBestTrackRow> rows) {
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].time_s <= rows[i - 1].time_s) throw InputError("times are not strictly increasing");
  }
  std::size_t first = 0;
  std::size_t last = rows.size();
  while (first < last && !rows[first].wmo_wind) ++first;
  while (last > first && !rows[last - 1].wmo_wind) --last;
  if (last - first < 2) throw InputError("fewer than 2 rows with position and wind");
  const auto used = rows.subspan(first, last - first);

  const std::size_t n = used.size();
  std::vector<double> t(n), lat(n), lon(n), wind(n);
  bool filled = false;
  for (std::size_t i = 0; i < n; ++i) {
    t[i] = static_cast<double>(used[i].time_s - used[0].time_s);
    lat[i] = used[i].lat;
    lon[i] = i == 0 ? used[i].lon : unwrap_lon(lon[i - 1], used[i].lon);
  }
  std::size_t lo = 0;  // row 0 always has wind
  for (std::size_t i = 0; i < n; ++i) {
    if (used[i].wmo_wind) {
      wind[i] = *used[i].wmo_wind;
      lo = i;
      continue;
    }
    filled = true;
    std::size_t hi = i + 1;
    while (!used[hi].wmo_wind) ++hi;
    const double a = *used[lo].wmo_wind;
    const double b = *used[hi].wmo_wind;
    wind[i] = a + (b - a) * ((t[i] - t[lo]) / (t[hi] - t[lo]));
  }

  HistoricalTrack track;
  track.storm_id = used[0].storm_id;
  track.basin = used[0].basin;
  track.genesis_year = used[0].season;
  track.genesis_day_of_year = day_of_year(used[0].time_s);
  track.wind_filled = filled;

  const double step = static_cast<double>(kStepSeconds);
  const auto n_steps = static_cast<int>(std::llround(t.back() / step));
  track.points.reserve(static_cast<std::size_t>(n_steps) + 1);
  std::size_t seg = 0;
  for (int k = 0; k <= n_steps; ++k) {
    const double tk = k * step;
    while (seg + 1 < n && t[seg + 1] <= tk) ++seg;
    TrackPoint p{k, lat[seg], lon[seg], wind[seg]};
    if (seg + 1 < n && tk > t[seg]) {
      const double frac = (tk - t[seg]) / (t[seg + 1] - t[seg]);
      p.lat = lat[seg] + (lat[seg + 1] - lat[seg]) * frac;
      p.lon = lon[seg] + (lon[seg + 1] - lon[seg]) * frac;
      p.wind_u10 = wind[seg] + (wind[seg + 1] - wind[seg]) * frac;
    }
    // Past the last row (duration rounded up) the last observation is held.
    track.points.push_back(p);
  }
  return track;
}

void convert_track_winds(HistoricalTrack& track, WindConvention convention) {
  if (track.wind_converted) throw InvariantError("track " + track.storm_id + " is already converted");
  for (auto& p : track.points) p.wind_u10 = convert_wind(p.wind_u10, convention);
  track.wind_converted = true;
}

TrackSet assemble_tracks(std::span<const RawBestTrackRow> rows, const BasinConfig& config, unsigned threads) {
  std::vector<std::pair<std::size_t, std::size_t>> groups;
  for (std::size_t i = 0; i < rows.size();) {
    std::size_t j = i + 1;
    while (j < rows.size() && rows[j].storm_id == rows[i].storm_id) ++j;
    groups.emplace_back(i, j - i);
    i = j;
  }

  std::vector<std::optional<HistoricalTrack>> built(groups.size());
  std::vector<std::string> reasons(groups.size());
  detail::parallel_for(groups.size(), threads, [&](std::size_t g) {
    try {
      auto track = interpolate_track(rows.subspan(groups[g].first, groups[g].second));
      convert_track_winds(track, config.wind_convention);
      built[g] = std::move(track);
    } catch (const InputError& e) {
      reasons[g] = e.what();
    }
  });

  TrackSet out;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    if (built[g]) {
      out.tracks.push_back(std::move(*built[g]));
    } else {
      out.dropped.push_back({rows[groups[g].first].storm_id, reasons[g]});
    }
  }
  return out;
}

void write_rejects(const std::filesystem::path& path, std::span<const RejectedRow> rejects) {
  std::string text = "line,reason\n";
  for (const auto& r : rejects) {
    text += std::to_string(r.line) + "," + detail::csv_escape(r.reason) + "\n";
  }
  detail::write_file_atomic(path, text);
}

}  // namespace whits
