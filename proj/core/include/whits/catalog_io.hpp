/**
 * @file catalog_io.hpp
 * @brief Point-per-row catalog CSV, metadata sidecar and provenance files.
 *
 * Catalog CSV columns: year,storm_index,step_index,timestamp,lat,lon,wind_u10_kt,join_flag.
 * Readers accept any catalog that carries at least year, storm_index,
 * step_index, lat, lon and wind_u10_kt, so external catalogs can be compared
 * after conversion to this layout.
 */
#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "whits/library.hpp"
#include "whits/simulator.hpp"

namespace whits {

/// "YYYY-MM-DDTHH:MM:SS" on a 365-day calendar starting at 00 UTC of the genesis day.
std::string synthetic_timestamp(int year, int genesis_day_of_year, int step_index);

/// Path of the metadata sidecar for a catalog or field CSV.
std::filesystem::path sidecar_path(const std::filesystem::path& csv_path);

/// Writes the CSV and its JSON sidecar; returns the FNV-1a 64 of the CSV bytes.
std::uint64_t write_catalog(const SyntheticCatalog& catalog, const std::filesystem::path& csv_path);

/// Per-track source ranges and join indices as JSON.
void write_provenance(const SyntheticCatalog& catalog, const SegmentLibrary& library,
                      const std::filesystem::path& path);

struct CatalogTrack {
  int year{};
  int storm_index{};
  std::vector<TrackPoint> points;  // longitudes unwrapped per track
};

struct LoadedCatalog {
  int n_years{};
  std::optional<Basin> basin;
  std::vector<CatalogTrack> tracks;
};

/**
 * @brief Reads a catalog CSV in the generic layout.
 *
 * n_years comes from the sidecar when present, else from `n_years_override`,
 * else the largest year label. Missing required columns raise FormatError
 * naming the column.
 */
LoadedCatalog read_catalog(const std::filesystem::path& csv_path,
                           std::optional<int> n_years_override = std::nullopt);

/// FNV-1a 64 over a file's bytes.
std::uint64_t file_checksum(const std::filesystem::path& path);

}  // namespace whits
