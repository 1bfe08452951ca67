#include "whits/config.hpp"

#include <fstream>
#include <initializer_list>
#include <sstream>

#include "json.hpp"

namespace whits {

using nlohmann::json;

namespace {

void check_keys(const json& obj, std::string_view where, std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) throw InputError("config: '" + std::string(where) + "' must be an object");
  for (const auto& [key, value] : obj.items()) {
    bool known = false;
    for (auto a : allowed) known = known || key == a;
    if (!known) throw InputError("config: unknown key '" + key + "' in '" + std::string(where) + "'");
  }
}

template <typename T>
void read(const json& obj, const char* key, T& out) {
  if (obj.contains(key)) out = obj.at(key).get<T>();
}

void read_path(const json& obj, const char* key, std::filesystem::path& out) {
  if (obj.contains(key)) out = obj.at(key).get<std::string>();
}

Basin basin_from(const json& v) {
  const auto code = v.get<std::string>();
  const auto b = parse_basin(code);
  if (!b) throw InputError("config: unknown basin '" + code + "'");
  return *b;
}

void apply_json(const json& doc, RunConfig& cfg) {
  check_keys(doc, "root", {"basin", "basin_config", "paths", "kernel", "simulation", "grid", "diagnostics", "threads"});

  if (doc.contains("basin_config")) {
    const auto& b = doc.at("basin_config");
    check_keys(b, "basin_config", {"record_start_year", "modern_cutoff_year", "record_end_year",
                                   "wind_convention", "conversion_factor", "columns"});
    read(b, "record_start_year", cfg.basin.record_start_year);
    read(b, "modern_cutoff_year", cfg.basin.modern_cutoff_year);
    read(b, "record_end_year", cfg.basin.record_end_year);
    if (b.contains("wind_convention")) {
      const auto name = b.at("wind_convention").get<std::string>();
      const auto conv = parse_convention(name);
      if (!conv) throw InputError("config: unknown wind convention '" + name + "'");
      cfg.basin.wind_convention = *conv;
      cfg.basin.conversion_factor = conversion_factor(*conv);
    }
    read(b, "conversion_factor", cfg.basin.conversion_factor);
    if (b.contains("columns")) {
      const auto& c = b.at("columns");
      check_keys(c, "columns", {"storm_id", "season", "basin", "iso_time", "lat", "lon", "wind"});
      auto& m = cfg.basin.columns;
      read(c, "storm_id", m.storm_id);
      read(c, "season", m.season);
      read(c, "basin", m.basin);
      read(c, "iso_time", m.iso_time);
      read(c, "lat", m.lat);
      read(c, "lon", m.lon);
      read(c, "wind", m.wind);
    }
  }
  if (doc.contains("paths")) {
    const auto& p = doc.at("paths");
    check_keys(p, "paths", {"archive", "library", "table", "catalog", "output_dir"});
    read_path(p, "archive", cfg.paths.archive);
    read_path(p, "library", cfg.paths.library);
    read_path(p, "table", cfg.paths.table);
    read_path(p, "catalog", cfg.paths.catalog);
    read_path(p, "output_dir", cfg.paths.output_dir);
  }
  if (doc.contains("kernel")) {
    const auto& k = doc.at("kernel");
    check_keys(k, "kernel", {"alpha_dist", "alpha_age", "alpha_vec", "alpha_wind", "radius_deg"});
    read(k, "alpha_dist", cfg.kernel.alpha_dist);
    read(k, "alpha_age", cfg.kernel.alpha_age);
    read(k, "alpha_vec", cfg.kernel.alpha_vec);
    read(k, "alpha_wind", cfg.kernel.alpha_wind);
    read(k, "radius_deg", cfg.kernel.radius_deg);
  }
  if (doc.contains("simulation")) {
    const auto& s = doc.at("simulation");
    check_keys(s, "simulation", {"n_years", "seed", "jump_probability", "smoothing_window", "reserved_steps"});
    read(s, "n_years", cfg.simulation.n_years);
    read(s, "seed", cfg.simulation.seed);
    read(s, "jump_probability", cfg.simulation.jump_probability);
    read(s, "smoothing_window", cfg.simulation.smoothing_window);
    read(s, "reserved_steps", cfg.simulation.reserved_steps);
  }
  if (doc.contains("grid") && !doc.at("grid").is_null()) {
    const auto& g = doc.at("grid");
    check_keys(g, "grid", {"cell_deg", "lat_min", "lat_max", "lon_min", "lon_max", "lon_frame"});
    GridSpec grid = cfg.effective_grid();
    read(g, "cell_deg", grid.cell_deg);
    read(g, "lat_min", grid.lat_min);
    read(g, "lat_max", grid.lat_max);
    read(g, "lon_min", grid.lon_min);
    read(g, "lon_max", grid.lon_max);
    if (g.contains("lon_frame")) {
      const auto frame = g.at("lon_frame").get<std::string>();
      if (frame == "greenwich") grid.lon_frame = LonFrame::Greenwich;
      else if (frame == "dateline") grid.lon_frame = LonFrame::Dateline;
      else throw InputError("config: unknown lon_frame '" + frame + "'");
    }
    cfg.grid = grid;
  }
  if (doc.contains("diagnostics")) {
    const auto& d = doc.at("diagnostics");
    check_keys(d, "diagnostics", {"n_b", "n_draws", "seed"});
    if (d.contains("n_b") && !d.at("n_b").is_null()) cfg.diagnostics.n_b = d.at("n_b").get<int>();
    read(d, "n_draws", cfg.diagnostics.n_draws);
    read(d, "seed", cfg.diagnostics.seed);
  }
  read(doc, "threads", cfg.threads);
}

}  // namespace

RunConfig default_config(Basin basin) {
  RunConfig cfg;
  cfg.basin = BasinConfig::defaults(basin);
  return cfg;
}

RunConfig parse_config(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw InputError(std::string("config: invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw InputError("config: top level must be an object");
  RunConfig cfg = default_config(doc.contains("basin") ? basin_from(doc.at("basin")) : Basin::NA);
  try {
    apply_json(doc, cfg);
  } catch (const json::exception& e) {
    throw InputError(std::string("config: ") + e.what());
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

std::string dump_config(const RunConfig& cfg) {
  const auto& b = cfg.basin;
  const auto& c = b.columns;
  const GridSpec g = cfg.effective_grid();
  json doc = {
      {"basin", std::string(basin_code(b.basin))},
      {"basin_config",
       {{"record_start_year", b.record_start_year},
        {"modern_cutoff_year", b.modern_cutoff_year},
        {"record_end_year", b.record_end_year},
        {"wind_convention", std::string(convention_name(b.wind_convention))},
        {"conversion_factor", b.conversion_factor},
        {"columns",
         {{"storm_id", c.storm_id},
          {"season", c.season},
          {"basin", c.basin},
          {"iso_time", c.iso_time},
          {"lat", c.lat},
          {"lon", c.lon},
          {"wind", c.wind}}}}},
      {"paths",
       {{"archive", cfg.paths.archive.string()},
        {"library", cfg.paths.library.string()},
        {"table", cfg.paths.table.string()},
        {"catalog", cfg.paths.catalog.string()},
        {"output_dir", cfg.paths.output_dir.string()}}},
      {"kernel",
       {{"alpha_dist", cfg.kernel.alpha_dist},
        {"alpha_age", cfg.kernel.alpha_age},
        {"alpha_vec", cfg.kernel.alpha_vec},
        {"alpha_wind", cfg.kernel.alpha_wind},
        {"radius_deg", cfg.kernel.radius_deg}}},
      {"simulation",
       {{"n_years", cfg.simulation.n_years},
        {"seed", cfg.simulation.seed},
        {"jump_probability", cfg.simulation.jump_probability},
        {"smoothing_window", cfg.simulation.smoothing_window},
        {"reserved_steps", cfg.simulation.reserved_steps}}},
      {"grid",
       {{"cell_deg", g.cell_deg},
        {"lat_min", g.lat_min},
        {"lat_max", g.lat_max},
        {"lon_min", g.lon_min},
        {"lon_max", g.lon_max},
        {"lon_frame", g.lon_frame == LonFrame::Dateline ? "dateline" : "greenwich"}}},
      {"diagnostics",
       {{"n_b", cfg.effective_n_b()}, {"n_draws", cfg.diagnostics.n_draws}, {"seed", cfg.diagnostics.seed}}},
      {"threads", cfg.threads}};
  return doc.dump(2) + "\n";
}

}  // namespace whits
