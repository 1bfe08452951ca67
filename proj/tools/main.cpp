// whits: ingest -> train -> simulate -> validate -> compare.
#include <iostream>

#include "CLI11.hpp"
#include "commands.hpp"

using namespace whits;
using namespace whits::cli;

namespace {

void add_common(CLI::App* cmd, CommonFlags& c) {
  cmd->add_option("-c,--config", c.config, "JSON run configuration; flags override its values");
  cmd->add_option("-b,--basin", c.basin, "Basin code: NA, EP, WP, NI, SI or SP")->default_str("NA");
  cmd->add_option("-o,--output-dir", c.output_dir,
                  "Output directory (default: paths.output_dir, then $WHITS_OUTPUT_DIR, then .)");
  cmd->add_option("-j,--threads", c.threads, "Worker threads, 0 = all cores; outputs do not depend on it")
      ->default_str("1");
}

void add_diagnostics(CLI::App* cmd, DiagnosticFlags& d) {
  cmd->add_option("--n-b", d.n_b, "Years per draw (default: the basin's modern window length)");
  cmd->add_option("--draws", d.draws, "Number of year draws for the cell-wise median")
      ->default_str("100");
  cmd->add_option("--diag-seed", d.seed, "Seed of the year draws")->default_str("0");
  cmd->add_option("--cell-deg", d.cell_deg, "Grid cell size in degrees")->default_str("2");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tropical-cyclone track simulator by kernel-weighted segment resampling"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kGeneratorVersion));

  CommonFlags common;

  IngestFlags ingest;
  auto* c_ingest = app.add_subcommand("ingest", "Parse a best-track archive into a segment library");
  add_common(c_ingest, common);
  c_ingest->add_option("-a,--archive", ingest.archive, "Best-track CSV (IBTrACS column layout by default)");
  c_ingest->add_option("-l,--library", ingest.library, "Library output")->default_str("<output-dir>/library.bin");

  TrainFlags train;
  auto* c_train = app.add_subcommand("train", "Precompute the kernel transition table");
  add_common(c_train, common);
  c_train->add_option("-l,--library", train.library, "Library input")->default_str("<output-dir>/library.bin");
  c_train->add_option("-t,--table", train.table, "Table output")->default_str("<output-dir>/table.bin");
  c_train->add_option("--radius", train.radius, "Candidate radius in degrees")
      ->default_str("2.5");
  c_train->add_option("--alpha-dist", train.alpha_dist, "Distance kernel exponent")->default_str("2");
  c_train->add_option("--alpha-age", train.alpha_age, "Relative-age kernel exponent")->default_str("2");
  c_train->add_option("--alpha-vec", train.alpha_vec, "Wind-vector kernel exponent")->default_str("4");
  c_train->add_option("--alpha-wind", train.alpha_wind, "Wind-speed kernel exponent")->default_str("4");
  c_train->add_option("--reserved-steps", train.reserved_steps,
                      "Steps at the end of each track excluded from transitions")
      ->default_str("max(3, window/2 rounded up, 5% of the mean track length)");
  c_train->add_option("--smoothing-window", train.smoothing_window, "Join smoothing window, odd")
      ->default_str("5");

  SimulateFlags sim;
  auto* c_sim = app.add_subcommand("simulate", "Generate a synthetic catalog");
  add_common(c_sim, common);
  c_sim->add_option("-l,--library", sim.library, "Library input")->default_str("<output-dir>/library.bin");
  c_sim->add_option("-t,--table", sim.table, "Table input")->default_str("<output-dir>/table.bin");
  c_sim->add_option("--catalog", sim.catalog, "Catalog CSV output")->default_str("<output-dir>/catalog.csv");
  c_sim->add_option("-y,--years", sim.years, "Synthetic years, labelled 1..N")->default_str("1")->check(CLI::Range(1, 100000000));
  c_sim->add_option("-s,--seed", sim.seed, "Random seed")->default_str("0");
  c_sim->add_option("-p,--jump-probability", sim.jump_probability,
                    "Per-step probability of a voluntary segment transition")
      ->default_str("0.1");
  c_sim->add_option("--smoothing-window", sim.smoothing_window, "Join smoothing window, odd")
      ->default_str("5");
  c_sim->add_flag("--provenance", sim.provenance, "Also write per-track source segments as JSON");

  ValidateFlags val;
  auto* c_val = app.add_subcommand("validate", "Observed and simulated track density and P64 fields");
  add_common(c_val, common);
  c_val->add_option("-l,--library", val.library, "Library input")->default_str("<output-dir>/library.bin");
  c_val->add_option("--catalog", val.catalog, "Synthetic catalog CSV");
  c_val->add_flag("--observed-only", val.observed_only, "Only compute the two observed fields");
  c_val->add_option("--observed-dir", val.observed_dir,
                    "Reuse observed fields exported by an earlier run; their grid must match");
  add_diagnostics(c_val, val.diag);

  CompareFlags cmp;
  auto* c_cmp = app.add_subcommand("compare", "Compare two catalogs on the same grid and protocol");
  add_common(c_cmp, common);
  c_cmp->add_option("catalog_a", cmp.catalog_a, "First catalog CSV")->required();
  c_cmp->add_option("catalog_b", cmp.catalog_b, "Second catalog CSV")->required();
  c_cmp->add_option("--years-a", cmp.years_a, "Catalog length of A when it has no sidecar");
  c_cmp->add_option("--years-b", cmp.years_b, "Catalog length of B when it has no sidecar");
  c_cmp->add_option("--protocol", cmp.protocol, "median: draw protocol; full: whole-catalog fields")
      ->check(CLI::IsMember({"median", "full"}))
      ->capture_default_str();
  add_diagnostics(c_cmp, cmp.diag);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (*c_ingest) return cmd_ingest(common, ingest);
    if (*c_train) return cmd_train(common, train);
    if (*c_sim) return cmd_simulate(common, sim);
    if (*c_val) return cmd_validate(common, val);
    if (*c_cmp) return cmd_compare(common, cmp);
  } catch (const UsageError& e) {
    std::cerr << "whits: " << e.what() << '\n';
    return 1;
  } catch (const InputError& e) {
    std::cerr << "whits: input error: " << e.what() << '\n';
    return 2;
  } catch (const FormatError& e) {
    std::cerr << "whits: format error: " << e.what() << '\n';
    return 2;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "whits: input error: " << e.what() << '\n';
    return 2;
  } catch (const InvariantError& e) {
    std::cerr << "whits: internal error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "whits: internal error: " << e.what() << '\n';
    return 3;
  }
  return 1;
}
