#include "commands.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "whits/catalog_io.hpp"
#include "whits/diagnostics.hpp"
#include "whits/ingest.hpp"
#include "whits/library.hpp"
#include "whits/simulator.hpp"
#include "whits/transition_table.hpp"

namespace whits::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

Basin basin_flag(const std::string& code) {
  const auto b = parse_basin(code);
  if (!b) throw UsageError("unknown basin '" + code + "' (expected NA, EP, WP, NI, SI or SP)");
  return *b;
}

unsigned thread_count(const RunConfig& cfg) {
  if (cfg.threads > 0) return cfg.threads;
  return std::max(1u, std::thread::hardware_concurrency());
}

fs::path output_dir(const RunConfig& cfg) {
  fs::create_directories(cfg.paths.output_dir);
  return cfg.paths.output_dir;
}

fs::path pick(const std::optional<std::string>& flag, const fs::path& configured, const fs::path& fallback) {
  if (flag) return *flag;
  if (!configured.empty()) return configured;
  return fallback;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw InputError("cannot write " + path.string());
}

void write_snapshot(const RunConfig& cfg, const std::string& command) {
  write_text(output_dir(cfg) / (command + "_config.json"), dump_config(cfg));
}

void require_file(const fs::path& path, const char* what) {
  if (!fs::exists(path)) throw InputError(std::string(what) + " not found: " + path.string());
}

void apply_diagnostic_flags(RunConfig& cfg, const DiagnosticFlags& d) {
  if (d.n_b) cfg.diagnostics.n_b = *d.n_b;
  if (d.draws) cfg.diagnostics.n_draws = *d.draws;
  if (d.seed) cfg.diagnostics.seed = *d.seed;
  if (d.cell_deg) {
    GridSpec g = cfg.grid ? *cfg.grid : GridSpec::for_basin(cfg.basin.basin, *d.cell_deg);
    g.cell_deg = *d.cell_deg;
    cfg.grid = g;
  }
  if (cfg.diagnostics.n_draws < 1) throw UsageError("--draws must be at least 1");
}

std::vector<TrackView> views_of(const LoadedCatalog& catalog) {
  std::vector<TrackView> views;
  views.reserve(catalog.tracks.size());
  for (const auto& t : catalog.tracks) views.push_back({t.year, t.points});
  return views;
}

json comparison_json(const FieldComparison& c) {
  json j = {{"cells", c.cells},
            {"positive_a", c.positive_a},
            {"positive_b", c.positive_b},
            {"jointly_positive", c.jointly_positive},
            {"mean_a", c.mean_a},
            {"mean_b", c.mean_b}};
  j["log_correlation"] = c.log_correlation ? json(*c.log_correlation) : json(nullptr);
  j["bias_ratio"] = c.bias_ratio ? json(*c.bias_ratio) : json(nullptr);
  return j;
}

std::string comparison_text(const std::string& prefix, const FieldComparison& c) {
  std::ostringstream s;
  s.precision(6);
  s << prefix << ".cells = " << c.cells << '\n'
    << prefix << ".jointly_positive = " << c.jointly_positive << '\n'
    << prefix << ".log_correlation = ";
  if (c.log_correlation) s << *c.log_correlation; else s << "undefined";
  s << '\n' << prefix << ".bias_ratio = ";
  if (c.bias_ratio) s << *c.bias_ratio; else s << "undefined";
  s << '\n';
  return s.str();
}

}  // namespace

RunConfig resolve_config(const CommonFlags& common) {
  RunConfig cfg = common.config ? load_config(*common.config)
                                : default_config(common.basin ? basin_flag(*common.basin) : Basin::NA);
  if (common.basin) {
    const Basin b = basin_flag(*common.basin);
    if (b != cfg.basin.basin) {
      const auto columns = cfg.basin.columns;
      cfg.basin = BasinConfig::defaults(b);
      cfg.basin.columns = columns;
    }
  }
  if (common.output_dir) {
    cfg.paths.output_dir = *common.output_dir;
  } else if (cfg.paths.output_dir.empty()) {
    const char* env = std::getenv("WHITS_OUTPUT_DIR");
    cfg.paths.output_dir = env && *env ? fs::path(env) : fs::path(".");
  }
  if (common.threads) cfg.threads = *common.threads;
  return cfg;
}

int cmd_ingest(const CommonFlags& common, const IngestFlags& flags) {
  RunConfig cfg = resolve_config(common);
  if (flags.archive) cfg.paths.archive = *flags.archive;
  if (cfg.paths.archive.empty()) throw UsageError("ingest needs an archive (--archive or paths.archive)");
  require_file(cfg.paths.archive, "archive");
  cfg.basin.validate();
  cfg.kernel.validate();
  const fs::path out = output_dir(cfg);
  cfg.paths.library = pick(flags.library, cfg.paths.library, out / "library.bin");

  const auto parsed = parse_archive(cfg.paths.archive, cfg.basin);
  auto set = assemble_tracks(parsed.rows, cfg.basin, thread_count(cfg));
  if (set.tracks.empty()) {
    throw InputError("no usable " + std::string(basin_code(cfg.basin.basin)) + " tracks in " +
                     cfg.paths.archive.string());
  }
  const std::size_t n_tracks = set.tracks.size();
  LibraryOptions options;
  options.radius_deg = cfg.kernel.radius_deg;
  const auto library = SegmentLibrary::build(std::move(set.tracks), cfg.basin, options, thread_count(cfg));
  library.save(cfg.paths.library);

  write_rejects(out / "rejects.csv", parsed.rejects);
  std::string dropped = "storm_id,reason\n";
  for (const auto& d : set.dropped) dropped += d.storm_id + "," + d.reason + "\n";
  write_text(out / "dropped_storms.csv", dropped);
  write_snapshot(cfg, "ingest");

  std::cout << "ingest " << basin_code(cfg.basin.basin) << ": " << n_tracks << " tracks ("
            << library.modern_count() << " modern), " << library.point_count() << " points, "
            << parsed.rejects.size() << " rejected rows, " << set.dropped.size() << " dropped storms\n"
            << "library " << cfg.paths.library.string() << " checksum " << hex(library.checksum()) << '\n';
  return 0;
}

int cmd_train(const CommonFlags& common, const TrainFlags& flags) {
  RunConfig cfg = resolve_config(common);
  const fs::path out = output_dir(cfg);
  cfg.paths.library = pick(flags.library, cfg.paths.library, out / "library.bin");
  cfg.paths.table = pick(flags.table, cfg.paths.table, out / "table.bin");
  if (flags.radius) cfg.kernel.radius_deg = *flags.radius;
  if (flags.alpha_dist) cfg.kernel.alpha_dist = *flags.alpha_dist;
  if (flags.alpha_age) cfg.kernel.alpha_age = *flags.alpha_age;
  if (flags.alpha_vec) cfg.kernel.alpha_vec = *flags.alpha_vec;
  if (flags.alpha_wind) cfg.kernel.alpha_wind = *flags.alpha_wind;
  if (flags.reserved_steps) cfg.simulation.reserved_steps = *flags.reserved_steps;
  if (flags.smoothing_window) cfg.simulation.smoothing_window = *flags.smoothing_window;
  cfg.kernel.validate();
  require_file(cfg.paths.library, "library");

  const auto library = SegmentLibrary::load(cfg.paths.library);
  cfg.basin = library.config();
  if (cfg.kernel.radius_deg != library.options().radius_deg) {
    throw InputError("kernel radius " + std::to_string(cfg.kernel.radius_deg) +
                     " differs from the library's normalizer radius " +
                     std::to_string(library.options().radius_deg) + "; re-run ingest with the same radius");
  }
  const int reserved = cfg.simulation.reserved_steps > 0
                           ? cfg.simulation.reserved_steps
                           : default_reserved_steps(library, cfg.simulation.smoothing_window);
  const auto table = TransitionTable::build(library, cfg.kernel, reserved, thread_count(cfg));
  table.save(cfg.paths.table);
  write_snapshot(cfg, "train");

  std::cout << "train " << basin_code(library.basin()) << ": " << table.row_count() << " rows, "
            << table.candidate_count() << " candidates, reserved_steps " << reserved << '\n'
            << "table " << cfg.paths.table.string() << " checksum " << hex(table.checksum())
            << " library checksum " << hex(table.header().library_checksum) << '\n';
  return 0;
}

int cmd_simulate(const CommonFlags& common, const SimulateFlags& flags) {
  RunConfig cfg = resolve_config(common);
  const fs::path out = output_dir(cfg);
  cfg.paths.library = pick(flags.library, cfg.paths.library, out / "library.bin");
  cfg.paths.table = pick(flags.table, cfg.paths.table, out / "table.bin");
  cfg.paths.catalog = pick(flags.catalog, cfg.paths.catalog, out / "catalog.csv");
  if (flags.years) cfg.simulation.n_years = *flags.years;
  if (flags.seed) cfg.simulation.seed = *flags.seed;
  if (flags.jump_probability) cfg.simulation.jump_probability = *flags.jump_probability;
  if (flags.smoothing_window) cfg.simulation.smoothing_window = *flags.smoothing_window;
  cfg.simulation.validate();
  require_file(cfg.paths.library, "library");
  require_file(cfg.paths.table, "table");

  const auto library = SegmentLibrary::load(cfg.paths.library);
  cfg.basin = library.config();
  const auto table = TransitionTable::load(cfg.paths.table, library);
  const auto dists = empirical_distributions(library);
  const auto catalog = generate_catalog(library, table, dists, cfg.simulation, thread_count(cfg));
  const auto csv_checksum = write_catalog(catalog, cfg.paths.catalog);
  if (flags.provenance) {
    auto prov = cfg.paths.catalog;
    prov.replace_extension(".provenance.json");
    write_provenance(catalog, library, prov);
  }
  write_snapshot(cfg, "simulate");

  const auto& s = catalog.stats;
  std::cout << "simulate " << basin_code(library.basin()) << ": " << catalog.n_years << " years, " << s.tracks
            << " tracks, " << s.points << " points, " << s.joins << " joins (" << s.forced_joins << " forced), "
            << s.early_terminations << " early terminations\n"
            << "catalog " << cfg.paths.catalog.string() << " checksum " << hex(csv_checksum) << '\n';
  return 0;
}

int cmd_validate(const CommonFlags& common, const ValidateFlags& flags) {
  RunConfig cfg = resolve_config(common);
  const fs::path out = output_dir(cfg);
  cfg.paths.library = pick(flags.library, cfg.paths.library, out / "library.bin");
  require_file(cfg.paths.library, "library");
  const auto library = SegmentLibrary::load(cfg.paths.library);
  cfg.basin = library.config();
  apply_diagnostic_flags(cfg, flags.diag);
  const GridSpec grid = cfg.effective_grid();
  grid.validate();
  const int window = cfg.basin.modern_window_years();

  GridField obs_density, obs_p64;
  if (flags.observed_dir) {
    const fs::path dir = *flags.observed_dir;
    obs_density = import_field(dir / "observed_density.csv");
    obs_p64 = import_field(dir / "observed_p64.csv");
    if (!(obs_density.grid == grid) || !(obs_p64.grid == grid)) {
      throw InputError("observed fields in " + dir.string() + " use a different grid than this run");
    }
  } else {
    std::vector<TrackView> observed;
    for (std::uint32_t t = 0; t < library.track_count(); ++t) {
      if (library.is_modern(t)) observed.push_back({library.track(t).genesis_year, library.track(t).points});
    }
    obs_density = track_density(observed, grid, window);
    obs_p64 = p64_field(observed, grid, window);
    obs_density.provenance = "observed modern window, " + std::to_string(window) + " years";
    obs_p64.provenance = obs_density.provenance;
  }
  export_field(obs_density, out / "observed_density.csv");
  export_field(obs_p64, out / "observed_p64.csv");

  json summary = {{"basin", std::string(basin_code(cfg.basin.basin))}, {"observed_years", window}};
  std::string text = "basin = " + std::string(basin_code(cfg.basin.basin)) + "\nobserved_years = " +
                     std::to_string(window) + "\n";
  if (!flags.observed_only) {
    if (flags.catalog) cfg.paths.catalog = *flags.catalog;
    if (cfg.paths.catalog.empty()) throw UsageError("validate needs --catalog or --observed-only");
    require_file(cfg.paths.catalog, "catalog");
    const auto catalog = read_catalog(cfg.paths.catalog);
    const auto views = views_of(catalog);
    const int n_b = cfg.effective_n_b();
    const unsigned threads = thread_count(cfg);
    const auto sim_density = median_field(views, catalog.n_years, grid, n_b, cfg.diagnostics.n_draws,
                                          Metric::TrackDensity, cfg.diagnostics.seed, threads);
    const auto sim_p64 = median_field(views, catalog.n_years, grid, n_b, cfg.diagnostics.n_draws, Metric::P64,
                                      cfg.diagnostics.seed, threads);
    export_field(sim_density, out / "simulated_density.csv");
    export_field(sim_p64, out / "simulated_p64.csv");
    const auto cd = compare_fields(obs_density, sim_density);
    const auto cp = compare_fields(obs_p64, sim_p64);
    summary["catalog_years"] = catalog.n_years;
    summary["n_b"] = n_b;
    summary["n_draws"] = cfg.diagnostics.n_draws;
    summary["track_density"] = comparison_json(cd);
    summary["p64"] = comparison_json(cp);
    text += "catalog_years = " + std::to_string(catalog.n_years) + "\nn_b = " + std::to_string(n_b) +
            "\nn_draws = " + std::to_string(cfg.diagnostics.n_draws) + "\n" +
            comparison_text("track_density", cd) + comparison_text("p64", cp);
  }
  write_text(out / "validate_summary.json", summary.dump(2) + "\n");
  write_text(out / "validate_summary.txt", text);
  write_snapshot(cfg, "validate");
  std::cout << text;
  return 0;
}

int cmd_compare(const CommonFlags& common, const CompareFlags& flags) {
  require_file(flags.catalog_a, "catalog");
  require_file(flags.catalog_b, "catalog");
  const auto a = read_catalog(flags.catalog_a, flags.years_a);
  const auto b = read_catalog(flags.catalog_b, flags.years_b);
  CommonFlags effective = common;
  if (!common.basin && !common.config && a.basin) effective.basin = std::string(basin_code(*a.basin));
  RunConfig cfg = resolve_config(effective);
  cfg.paths.catalog = flags.catalog_a;
  apply_diagnostic_flags(cfg, flags.diag);
  const GridSpec grid = cfg.effective_grid();
  grid.validate();
  const fs::path out = output_dir(cfg);
  const unsigned threads = thread_count(cfg);
  const int n_b = cfg.effective_n_b();

  auto fields = [&](const LoadedCatalog& c) {
    const auto views = views_of(c);
    if (flags.protocol == "full") {
      return std::pair{track_density(views, grid, c.n_years), p64_field(views, grid, c.n_years)};
    }
    return std::pair{median_field(views, c.n_years, grid, n_b, cfg.diagnostics.n_draws, Metric::TrackDensity,
                                  cfg.diagnostics.seed, threads),
                     median_field(views, c.n_years, grid, n_b, cfg.diagnostics.n_draws, Metric::P64,
                                  cfg.diagnostics.seed, threads)};
  };
  const auto [da, pa] = fields(a);
  const auto [db, pb] = fields(b);
  export_field(da, out / "a_density.csv");
  export_field(pa, out / "a_p64.csv");
  export_field(db, out / "b_density.csv");
  export_field(pb, out / "b_p64.csv");
  const auto cd = compare_fields(da, db);
  const auto cp = compare_fields(pa, pb);

  json summary = {{"catalog_a", flags.catalog_a},
                  {"catalog_b", flags.catalog_b},
                  {"years_a", a.n_years},
                  {"years_b", b.n_years},
                  {"protocol", flags.protocol},
                  {"track_density", comparison_json(cd)},
                  {"p64", comparison_json(cp)}};
  std::string text = "catalog_a = " + flags.catalog_a + "\ncatalog_b = " + flags.catalog_b +
                     "\nyears_a = " + std::to_string(a.n_years) + "\nyears_b = " + std::to_string(b.n_years) +
                     "\nprotocol = " + flags.protocol + "\n";
  if (flags.protocol == "median") {
    summary["n_b"] = n_b;
    summary["n_draws"] = cfg.diagnostics.n_draws;
    text += "n_b = " + std::to_string(n_b) + "\nn_draws = " + std::to_string(cfg.diagnostics.n_draws) + "\n";
  }
  text += comparison_text("track_density", cd) + comparison_text("p64", cp);
  write_text(out / "compare_summary.json", summary.dump(2) + "\n");
  write_text(out / "compare_summary.txt", text);
  write_snapshot(cfg, "compare");
  std::cout << text;
  return 0;
}

}  // namespace whits::cli
