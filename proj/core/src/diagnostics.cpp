#include "whits/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include "csv.hpp"
#include "json.hpp"
#include "parallel.hpp"
#include "serialization.hpp"
#include "whits/catalog_io.hpp"
#include "whits/geo.hpp"
#include "whits/random.hpp"

namespace whits {

using nlohmann::json;

GridSpec GridSpec::for_basin(Basin basin, double cell_deg) {
  GridSpec g;
  g.cell_deg = cell_deg;
  switch (basin) {
    case Basin::NA: g.lat_min = 0; g.lat_max = 70; g.lon_min = -110; g.lon_max = 10; break;
    case Basin::EP: g.lat_min = 0; g.lat_max = 50; g.lon_min = -180; g.lon_max = -70; break;
    case Basin::WP:
      g.lat_min = -10; g.lat_max = 60; g.lon_min = 90; g.lon_max = 200;
      g.lon_frame = LonFrame::Dateline;
      break;
    case Basin::NI: g.lat_min = -10; g.lat_max = 40; g.lon_min = 40; g.lon_max = 110; break;
    case Basin::SI: g.lat_min = -50; g.lat_max = 0; g.lon_min = 10; g.lon_max = 140; break;
    case Basin::SP:
      g.lat_min = -60; g.lat_max = 0; g.lon_min = 130; g.lon_max = 250;
      g.lon_frame = LonFrame::Dateline;
      break;
  }
  return g;
}

int GridSpec::n_lat() const { return static_cast<int>(std::lround((lat_max - lat_min) / cell_deg)); }
int GridSpec::n_lon() const { return static_cast<int>(std::lround((lon_max - lon_min) / cell_deg)); }

namespace {

double to_frame(double lon, LonFrame frame) {
  if (frame == LonFrame::Dateline) {
    double x = std::fmod(lon, 360.0);
    if (x < 0.0) x += 360.0;
    return x;
  }
  double x = std::fmod(lon + 180.0, 360.0);
  if (x < 0.0) x += 360.0;
  return x - 180.0;
}

std::optional<int> axis_index(double x, double lo, double hi, double cell, int n) {
  if (!(x >= lo && x <= hi)) return std::nullopt;
  const int i = static_cast<int>(std::floor((x - lo) / cell));
  return std::clamp(i, 0, n - 1);
}

bool near_multiple(double span, double cell) {
  const double k = span / cell;
  return std::abs(k - std::round(k)) < 1e-9 && std::round(k) >= 1.0;
}

}  // namespace

std::optional<std::size_t> GridSpec::cell_of(double lat, double lon) const {
  const auto i = axis_index(lat, lat_min, lat_max, cell_deg, n_lat());
  if (!i) return std::nullopt;
  double x = to_frame(lon, lon_frame);
  // A domain edge at the frame's upper wrap point (180 or 360) is reachable only as its alias.
  if (x < lon_min && x + 360.0 <= lon_max) x += 360.0;
  const auto j = axis_index(x, lon_min, lon_max, cell_deg, n_lon());
  if (!j) return std::nullopt;
  return static_cast<std::size_t>(*i) * static_cast<std::size_t>(n_lon()) + static_cast<std::size_t>(*j);
}

double GridSpec::cell_lat(std::size_t cell) const {
  return lat_min + (static_cast<double>(cell / static_cast<std::size_t>(n_lon())) + 0.5) * cell_deg;
}

double GridSpec::cell_lon(std::size_t cell) const {
  return lon_min + (static_cast<double>(cell % static_cast<std::size_t>(n_lon())) + 0.5) * cell_deg;
}

void GridSpec::validate() const {
  if (!(cell_deg > 0.0)) throw InputError("grid cell size must be positive");
  if (!(lat_min >= -90.0 && lat_max <= 90.0 && lat_min < lat_max)) throw InputError("grid latitude bounds invalid");
  const double frame_lo = lon_frame == LonFrame::Dateline ? 0.0 : -180.0;
  if (!(lon_min >= frame_lo && lon_max <= frame_lo + 360.0 && lon_min < lon_max)) {
    throw InputError("grid longitude bounds invalid for the longitude frame");
  }
  if (!near_multiple(lat_max - lat_min, cell_deg) || !near_multiple(lon_max - lon_min, cell_deg)) {
    throw InputError("grid bounds must span whole cells");
  }
}

std::string_view units_name(FieldUnits units) {
  switch (units) {
    case FieldUnits::TrackPointsPerYear: return "track_points_per_year";
    case FieldUnits::AnnualProbability: return "annual_probability";
    case FieldUnits::Ratio: return "ratio";
  }
  return "unknown";
}

namespace {

FieldUnits parse_units(const std::string& s) {
  for (auto u : {FieldUnits::TrackPointsPerYear, FieldUnits::AnnualProbability, FieldUnits::Ratio}) {
    if (units_name(u) == s) return u;
  }
  throw FormatError("unknown field units '" + s + "'");
}

// Per-year sparse contributions, so that a draw is a sum over its years.
struct YearContributions {
  std::vector<std::vector<std::pair<std::size_t, std::uint64_t>>> counts;  // density
  std::vector<std::vector<std::size_t>> hits;                               // p64
};

std::map<int, std::vector<std::size_t>> group_by_year(std::span<const TrackView> tracks) {
  std::map<int, std::vector<std::size_t>> by_year;
  for (std::size_t i = 0; i < tracks.size(); ++i) by_year[tracks[i].year].push_back(i);
  return by_year;
}

// Cells whose pooled wind sum reaches the threshold for the given tracks of one year.
std::vector<std::size_t> year_hits(std::span<const TrackView> tracks, const std::vector<std::size_t>& members,
                                   const GridSpec& grid, std::vector<double>& scratch) {
  std::vector<std::size_t> touched;
  for (auto t : members) {
    for (const auto& p : tracks[t].points) {
      const auto c = grid.cell_of(p.lat, p.lon);
      if (!c) continue;
      if (scratch[*c] == 0.0) touched.push_back(*c);
      scratch[*c] += p.wind_u10;
    }
  }
  std::vector<std::size_t> hits;
  for (auto c : touched) {
    if (scratch[c] >= kHurricaneForceKt) hits.push_back(c);
    scratch[c] = 0.0;
  }
  std::sort(hits.begin(), hits.end());
  hits.erase(std::unique(hits.begin(), hits.end()), hits.end());
  return hits;
}

}  // namespace

GridField track_density(std::span<const TrackView> tracks, const GridSpec& grid, double n_years) {
  if (!(n_years > 0.0)) throw InputError("track density needs n_years > 0");
  grid.validate();
  std::vector<std::uint64_t> counts(grid.cell_count(), 0);
  for (const auto& t : tracks) {
    for (const auto& p : t.points) {
      if (const auto c = grid.cell_of(p.lat, p.lon)) ++counts[*c];
    }
  }
  GridField f{grid, FieldUnits::TrackPointsPerYear, n_years, "track density", {}};
  f.values.resize(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) f.values[i] = static_cast<double>(counts[i]) / n_years;
  return f;
}

GridField p64_field(std::span<const TrackView> tracks, const GridSpec& grid, int n_years) {
  if (n_years <= 0) throw InputError("P64 needs n_years > 0");
  grid.validate();
  const auto by_year = group_by_year(tracks);
  if (by_year.size() > static_cast<std::size_t>(n_years)) {
    throw InputError("P64: " + std::to_string(by_year.size()) + " distinct years exceed n_years " +
                     std::to_string(n_years));
  }
  std::vector<double> scratch(grid.cell_count(), 0.0);
  std::vector<std::uint64_t> years_hit(grid.cell_count(), 0);
  for (const auto& [year, members] : by_year) {
    for (auto c : year_hits(tracks, members, grid, scratch)) ++years_hit[c];
  }
  GridField f{grid, FieldUnits::AnnualProbability, static_cast<double>(n_years), "P64", {}};
  f.values.resize(years_hit.size());
  for (std::size_t i = 0; i < years_hit.size(); ++i) {
    f.values[i] = static_cast<double>(years_hit[i]) / static_cast<double>(n_years);
  }
  return f;
}

GridField median_field(std::span<const TrackView> tracks, int catalog_years, const GridSpec& grid, int n_b,
                       int n_draws, Metric metric, std::uint64_t seed, unsigned threads) {
  grid.validate();
  if (n_b <= 0) throw InputError("median field needs n_b > 0");
  if (n_draws <= 0) throw InputError("median field needs n_draws >= 1");
  if (n_b > catalog_years) {
    throw InputError("n_b " + std::to_string(n_b) + " exceeds catalog length " + std::to_string(catalog_years));
  }
  const auto by_year = group_by_year(tracks);
  if (!by_year.empty() && (by_year.begin()->first < 1 || by_year.rbegin()->first > catalog_years)) {
    throw InputError("track year labels must lie in 1.." + std::to_string(catalog_years));
  }

  const std::size_t cells = grid.cell_count();
  YearContributions contrib;
  contrib.counts.resize(static_cast<std::size_t>(catalog_years) + 1);
  contrib.hits.resize(static_cast<std::size_t>(catalog_years) + 1);
  {
    std::vector<double> scratch(cells, 0.0);
    for (const auto& [year, members] : by_year) {
      if (metric == Metric::P64) {
        contrib.hits[static_cast<std::size_t>(year)] = year_hits(tracks, members, grid, scratch);
        continue;
      }
      std::map<std::size_t, std::uint64_t> counts;
      for (auto t : members) {
        for (const auto& p : tracks[t].points) {
          if (const auto c = grid.cell_of(p.lat, p.lon)) ++counts[*c];
        }
      }
      contrib.counts[static_cast<std::size_t>(year)].assign(counts.begin(), counts.end());
    }
  }

  // draws[d * cells + c]
  std::vector<double> draws(static_cast<std::size_t>(n_draws) * cells, 0.0);
  detail::parallel_for(static_cast<std::size_t>(n_draws), threads, [&](std::size_t d) {
    Rng rng(seed, d);
    std::vector<int> years(static_cast<std::size_t>(catalog_years));
    for (int y = 0; y < catalog_years; ++y) years[static_cast<std::size_t>(y)] = y + 1;
    for (int k = 0; k < n_b; ++k) {
      const auto j = static_cast<std::size_t>(k) +
                     static_cast<std::size_t>(rng.uniform_index(static_cast<std::uint64_t>(catalog_years - k)));
      std::swap(years[static_cast<std::size_t>(k)], years[j]);
    }
    std::vector<std::uint64_t> totals(cells, 0);
    for (int k = 0; k < n_b; ++k) {
      const auto y = static_cast<std::size_t>(years[static_cast<std::size_t>(k)]);
      if (metric == Metric::P64) {
        for (auto c : contrib.hits[y]) ++totals[c];
      } else {
        for (const auto& [c, n] : contrib.counts[y]) totals[c] += n;
      }
    }
    double* out = draws.data() + static_cast<std::size_t>(d) * cells;
    for (std::size_t c = 0; c < cells; ++c) out[c] = static_cast<double>(totals[c]) / static_cast<double>(n_b);
  });

  GridField f{grid,
              metric == Metric::P64 ? FieldUnits::AnnualProbability : FieldUnits::TrackPointsPerYear,
              static_cast<double>(n_b),
              std::string(metric == Metric::P64 ? "P64" : "track density") + " median of " +
                  std::to_string(n_draws) + " draws of " + std::to_string(n_b) + " years from " +
                  std::to_string(catalog_years) + ", seed " + std::to_string(seed),
              std::vector<double>(cells, 0.0)};
  std::vector<double> column(static_cast<std::size_t>(n_draws));
  const auto mid = static_cast<std::size_t>(n_draws / 2);
  for (std::size_t c = 0; c < cells; ++c) {
    for (std::size_t d = 0; d < column.size(); ++d) column[d] = draws[d * cells + c];
    std::nth_element(column.begin(), column.begin() + static_cast<std::ptrdiff_t>(mid), column.end());
    const double upper = column[mid];
    if (n_draws % 2 == 1) {
      f.values[c] = upper;
    } else {
      const double lower = *std::max_element(column.begin(), column.begin() + static_cast<std::ptrdiff_t>(mid));
      f.values[c] = 0.5 * (lower + upper);
    }
  }
  return f;
}

FieldComparison compare_fields(const GridField& a, const GridField& b) {
  if (!(a.grid == b.grid)) throw InputError("cannot compare fields on different grids");
  if (a.values.size() != b.values.size()) throw InputError("field sizes differ");
  FieldComparison r;
  r.cells = a.values.size();
  double sum_a = 0.0, sum_b = 0.0;
  std::vector<std::pair<double, double>> logs;
  for (std::size_t i = 0; i < r.cells; ++i) {
    const double x = a.values[i], y = b.values[i];
    sum_a += x;
    sum_b += y;
    if (x > 0.0) ++r.positive_a;
    if (y > 0.0) ++r.positive_b;
    if (x > 0.0 && y > 0.0) logs.emplace_back(std::log10(x), std::log10(y));
  }
  r.jointly_positive = logs.size();
  if (r.cells > 0) {
    r.mean_a = sum_a / static_cast<double>(r.cells);
    r.mean_b = sum_b / static_cast<double>(r.cells);
  }
  if (r.mean_a > 0.0) r.bias_ratio = r.mean_b / r.mean_a;
  if (logs.size() >= 2) {
    double mx = 0.0, my = 0.0;
    for (const auto& [x, y] : logs) {
      mx += x;
      my += y;
    }
    mx /= static_cast<double>(logs.size());
    my /= static_cast<double>(logs.size());
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (const auto& [x, y] : logs) {
      sxy += (x - mx) * (y - my);
      sxx += (x - mx) * (x - mx);
      syy += (y - my) * (y - my);
    }
    if (sxx > 0.0 && syy > 0.0) r.log_correlation = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  }
  return r;
}

void export_field(const GridField& field, const std::filesystem::path& csv_path) {
  std::string text = "lat_cell,lon_cell,value\n";
  for (std::size_t c = 0; c < field.values.size(); ++c) {
    if (field.values[c] == 0.0) continue;
    text += detail::format_double(field.grid.cell_lat(c));
    text += ',';
    text += detail::format_double(field.grid.cell_lon(c));
    text += ',';
    text += detail::format_double(field.values[c]);
    text += '\n';
  }
  const auto& g = field.grid;
  json meta = {{"format", "whits-field"},
               {"schema_version", 1},
               {"units", std::string(units_name(field.units))},
               {"n_years_basis", field.n_years_basis},
               {"provenance", field.provenance},
               {"grid",
                {{"cell_deg", g.cell_deg},
                 {"lat_min", g.lat_min},
                 {"lat_max", g.lat_max},
                 {"lon_min", g.lon_min},
                 {"lon_max", g.lon_max},
                 {"lon_frame", g.lon_frame == LonFrame::Dateline ? "dateline" : "greenwich"}}},
               {"cell_coordinates", "cell centre, degrees"},
               {"ordering", "row-major by latitude then longitude; zero cells omitted"},
               {"display", {{"color_scale", "log"}}}};
  detail::write_file_atomic(csv_path, text);
  detail::write_file_atomic(sidecar_path(csv_path), meta.dump(2) + "\n");
}

GridField import_field(const std::filesystem::path& csv_path) {
  const std::string what = "field " + csv_path.string();
  std::ifstream meta_in(sidecar_path(csv_path));
  if (!meta_in) throw InputError(what + ": missing sidecar " + sidecar_path(csv_path).string());
  GridField f;
  try {
    const auto meta = json::parse(meta_in);
    const auto& g = meta.at("grid");
    f.grid.cell_deg = g.at("cell_deg").get<double>();
    f.grid.lat_min = g.at("lat_min").get<double>();
    f.grid.lat_max = g.at("lat_max").get<double>();
    f.grid.lon_min = g.at("lon_min").get<double>();
    f.grid.lon_max = g.at("lon_max").get<double>();
    f.grid.lon_frame = g.at("lon_frame").get<std::string>() == "dateline" ? LonFrame::Dateline : LonFrame::Greenwich;
    f.units = parse_units(meta.at("units").get<std::string>());
    f.n_years_basis = meta.at("n_years_basis").get<double>();
    f.provenance = meta.value("provenance", std::string{});
  } catch (const json::exception& e) {
    throw FormatError(what + ": bad sidecar: " + e.what());
  }
  try {
    f.grid.validate();
  } catch (const InputError& e) {
    throw FormatError(what + ": " + e.what());
  }
  f.values.assign(f.grid.cell_count(), 0.0);

  std::ifstream in(csv_path);
  if (!in) throw InputError("cannot open " + what);
  std::string line;
  std::getline(in, line);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto parts = detail::split_csv_line(line);
    std::optional<double> lat, lon, value;
    if (parts.size() == 3) {
      lat = detail::parse_number<double>(parts[0]);
      lon = detail::parse_number<double>(parts[1]);
      value = detail::parse_number<double>(parts[2]);
    }
    const auto cell = lat && lon ? f.grid.cell_of(*lat, *lon) : std::nullopt;
    if (!cell || !value) throw FormatError(what + ": line " + std::to_string(line_no) + ": bad record");
    f.values[*cell] = *value;
  }
  return f;
}

}  // namespace whits
