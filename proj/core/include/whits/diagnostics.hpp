/**
 * @file diagnostics.hpp
 * @brief Gridded track density and annual hurricane-force wind-hit probability.
 */
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "whits/types.hpp"

namespace whits {

inline constexpr double kHurricaneForceKt = 64.0;

/// Longitude frame of a grid: [-180, 180) or [0, 360) for panels spanning the antimeridian.
enum class LonFrame : std::uint8_t { Greenwich, Dateline };

/**
 * @brief Regular lat/lon raster. Cells own their lower-left corner (half-open);
 * points on the upper domain bound belong to the last cell.
 */
struct GridSpec {
  double cell_deg{2.0};
  double lat_min{};
  double lat_max{};
  double lon_min{};
  double lon_max{};
  LonFrame lon_frame{LonFrame::Greenwich};

  /// Default 2-degree panel for a basin.
  static GridSpec for_basin(Basin basin, double cell_deg = 2.0);

  int n_lat() const;
  int n_lon() const;
  std::size_t cell_count() const { return static_cast<std::size_t>(n_lat()) * n_lon(); }

  /// Row-major (latitude, then longitude) cell index, or nullopt outside the domain.
  std::optional<std::size_t> cell_of(double lat, double lon) const;
  /// Cell centre coordinates.
  double cell_lat(std::size_t cell) const;
  double cell_lon(std::size_t cell) const;

  /// Throws InputError unless bounds are ordered multiples of the cell size.
  void validate() const;

  bool operator==(const GridSpec&) const = default;
};

enum class FieldUnits : std::uint8_t { TrackPointsPerYear, AnnualProbability, Ratio };

std::string_view units_name(FieldUnits units);

struct GridField {
  GridSpec grid;
  FieldUnits units{FieldUnits::TrackPointsPerYear};
  double n_years_basis{1.0};
  std::string provenance;
  std::vector<double> values;  // row-major, grid.cell_count() entries
};

/// Read-only view of a track tagged with its (observed or synthetic) year.
struct TrackView {
  int year{};
  std::span<const TrackPoint> points;
};

/// Track points per cell divided by n_years. Throws InputError unless n_years > 0.
GridField track_density(std::span<const TrackView> tracks, const GridSpec& grid, double n_years);

/**
 * @brief Fraction of years in which a cell's summed track-point wind reaches 64 kt.
 *
 * The sum pools every point of every storm that falls in the cell that year.
 */
GridField p64_field(std::span<const TrackView> tracks, const GridSpec& grid, int n_years);

enum class Metric : std::uint8_t { TrackDensity, P64 };

/**
 * @brief Cell-wise median of `metric` over `n_draws` samples of `n_b` distinct years.
 *
 * Years are labelled 1..catalog_years. Draw d uses the (seed, d) substream, so
 * the result does not depend on `threads`. Even draw counts average the two
 * middle values. Throws InputError when n_b exceeds catalog_years.
 */
GridField median_field(std::span<const TrackView> tracks, int catalog_years, const GridSpec& grid, int n_b,
                       int n_draws, Metric metric, std::uint64_t seed, unsigned threads = 1);

struct FieldComparison {
  std::size_t cells{};
  std::size_t positive_a{};
  std::size_t positive_b{};
  std::size_t jointly_positive{};
  double mean_a{};
  double mean_b{};
  std::optional<double> log_correlation;  // Pearson of log10 over jointly positive cells
  std::optional<double> bias_ratio;       // mean_b / mean_a
};

/// Throws InputError when the grids differ.
FieldComparison compare_fields(const GridField& a, const GridField& b);

/// CSV lat_cell,lon_cell,value (non-zero cells, row-major) plus JSON sidecar.
void export_field(const GridField& field, const std::filesystem::path& csv_path);
GridField import_field(const std::filesystem::path& csv_path);

}  // namespace whits
