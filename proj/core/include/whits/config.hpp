/**
 * @file config.hpp
 * @brief Run configuration shared by the command-line pipeline.
 */
#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "whits/diagnostics.hpp"
#include "whits/ingest.hpp"
#include "whits/kernel.hpp"
#include "whits/simulator.hpp"

namespace whits {

struct DiagnosticsProtocol {
  std::optional<int> n_b;  // defaults to the basin's modern window length
  int n_draws{100};
  std::uint64_t seed{0};
};

struct RunPaths {
  std::filesystem::path archive;
  std::filesystem::path library;
  std::filesystem::path table;
  std::filesystem::path catalog;
  std::filesystem::path output_dir;
};

struct RunConfig {
  BasinConfig basin{BasinConfig::defaults(Basin::NA)};
  RunPaths paths;
  KernelParams kernel;
  SimulationParams simulation;
  std::optional<GridSpec> grid;  // defaults to GridSpec::for_basin
  DiagnosticsProtocol diagnostics;
  unsigned threads{1};

  GridSpec effective_grid() const { return grid ? *grid : GridSpec::for_basin(basin.basin); }
  int effective_n_b() const { return diagnostics.n_b ? *diagnostics.n_b : basin.modern_window_years(); }
};

/// Config for `basin` with the default settings.
RunConfig default_config(Basin basin);

/**
 * @brief Reads a JSON config. Keys that are absent keep their defaults; the
 * basin key, when present, selects the basin defaults before other keys apply.
 * Throws InputError on unreadable files, bad JSON or unknown enum values.
 */
RunConfig load_config(const std::filesystem::path& path);
RunConfig parse_config(const std::string& json_text);

/// Full JSON snapshot of the effective configuration.
std::string dump_config(const RunConfig& config);

}  // namespace whits
