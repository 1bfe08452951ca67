// Subcommand implementations for the whits tool.
#pragma once

#include <optional>
#include <stdexcept>
#include <string>

#include "whits/config.hpp"

namespace whits::cli {

/// Bad or missing command-line arguments (exit code 1).
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CommonFlags {
  std::optional<std::string> config;
  std::optional<std::string> basin;
  std::optional<std::string> output_dir;
  std::optional<unsigned> threads;
};

struct IngestFlags {
  std::optional<std::string> archive;
  std::optional<std::string> library;
};

struct TrainFlags {
  std::optional<std::string> library;
  std::optional<std::string> table;
  std::optional<double> radius;
  std::optional<double> alpha_dist;
  std::optional<double> alpha_age;
  std::optional<double> alpha_vec;
  std::optional<double> alpha_wind;
  std::optional<int> reserved_steps;
  std::optional<int> smoothing_window;
};

struct SimulateFlags {
  std::optional<std::string> library;
  std::optional<std::string> table;
  std::optional<std::string> catalog;
  std::optional<int> years;
  std::optional<std::uint64_t> seed;
  std::optional<double> jump_probability;
  std::optional<int> smoothing_window;
  bool provenance{false};
};

struct DiagnosticFlags {
  std::optional<int> n_b;
  std::optional<int> draws;
  std::optional<std::uint64_t> seed;
  std::optional<double> cell_deg;
};

struct ValidateFlags {
  std::optional<std::string> library;
  std::optional<std::string> catalog;
  std::optional<std::string> observed_dir;
  bool observed_only{false};
  DiagnosticFlags diag;
};

struct CompareFlags {
  std::string catalog_a;
  std::string catalog_b;
  std::optional<int> years_a;
  std::optional<int> years_b;
  std::string protocol{"median"};
  DiagnosticFlags diag;
};

/// Config file (or basin defaults), then flags; flags win.
RunConfig resolve_config(const CommonFlags& common);

int cmd_ingest(const CommonFlags& common, const IngestFlags& flags);
int cmd_train(const CommonFlags& common, const TrainFlags& flags);
int cmd_simulate(const CommonFlags& common, const SimulateFlags& flags);
int cmd_validate(const CommonFlags& common, const ValidateFlags& flags);
int cmd_compare(const CommonFlags& common, const CompareFlags& flags);

}  // namespace whits::cli
