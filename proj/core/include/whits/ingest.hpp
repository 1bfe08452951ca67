/**
 * @file ingest.hpp
 * @brief Best-track archive parsing, wind conversion and 3-hourly interpolation.
 */
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "whits/types.hpp"

namespace whits {

/// Header names of the archive columns that are read. Defaults follow the IBTrACS v04 list files.
struct ColumnMap {
  std::string storm_id{"SID"};
  std::string season{"SEASON"};
  std::string basin{"BASIN"};
  std::string iso_time{"ISO_TIME"};
  std::string lat{"LAT"};
  std::string lon{"LON"};
  std::string wind{"WMO_WIND"};
};

struct BasinConfig {
  Basin basin{Basin::NA};
  int record_start_year{};
  int modern_cutoff_year{};
  int record_end_year{};
  WindConvention wind_convention{WindConvention::TenMinute};
  double conversion_factor{1.0};
  ColumnMap columns{};

  /// Record windows, observing-era cutoffs and agency wind conventions.
  static BasinConfig defaults(Basin basin);

  int modern_start_year() const;
  /// Number of years in the modern observing window (Nb).
  int modern_window_years() const;

  /// Throws InputError when windows or the conversion factor are inconsistent.
  void validate() const;
};

/// Multiplier that maps an agency averaging period onto the 10-min U10 scale.
double conversion_factor(WindConvention convention);

/// Converts a sustained wind in knots to the 10-min U10 scale. Throws InputError on negative speed.
double convert_wind(double knots, WindConvention convention);

struct RawBestTrackRow {
  std::string storm_id;
  int season{};
  Basin basin{Basin::NA};
  std::int64_t time_s{};  // seconds since 1970-01-01 UTC
  double lat{};
  double lon{};           // (-180, 180]
  std::optional<double> wmo_wind;
  std::size_t line{};
};

struct RejectedRow {
  std::size_t line{};
  std::string reason;
};

struct ParseResult {
  std::vector<RawBestTrackRow> rows;
  std::vector<RejectedRow> rejects;
  std::size_t skipped_other_basin{};
  std::size_t skipped_out_of_window{};
};

/**
 * @brief Reads a point-per-row best-track CSV.
 *
 * Keeps rows of the configured basin within the record window, sorted by
 * (storm id, time). Malformed rows and missing or out-of-range positions go
 * to the rejects list with their 1-based line number. A units row directly
 * under the header (IBTrACS style) is skipped.
 */
ParseResult parse_archive(std::istream& in, const BasinConfig& config);

/// As above; throws InputError when the file cannot be opened.
ParseResult parse_archive(const std::filesystem::path& path, const BasinConfig& config);

/// Parses "YYYY-MM-DD HH:MM[:SS]" (or with a 'T' separator) as UTC seconds.
std::optional<std::int64_t> parse_iso_time(std::string_view text);

inline constexpr std::int64_t kStepSeconds = 3 * 3600;

/**
 * @brief Interpolates one storm's rows onto a 3-h grid anchored at its first row.
 *
 * Rows without wind at either end are dropped and interior wind gaps are
 * filled linearly in time (flagged by `wind_filled`). Longitudes are unwrapped
 * before interpolation. Winds are left on the agency scale. Throws InputError
 * when fewer than two usable rows remain or times are not strictly increasing.
 */
HistoricalTrack interpolate_track(std::span<const RawBestTrackRow> rows);

/// Applies the basin conversion exactly once; throws InvariantError if already converted.
void convert_track_winds(HistoricalTrack& track, WindConvention convention);

struct DroppedStorm {
  std::string storm_id;
  std::string reason;
};

struct TrackSet {
  std::vector<HistoricalTrack> tracks;
  std::vector<DroppedStorm> dropped;
};

/// Groups sorted rows by storm, interpolates and converts each storm. Storm order is preserved.
TrackSet assemble_tracks(std::span<const RawBestTrackRow> rows, const BasinConfig& config,
                         unsigned threads = 1);

/// Writes the rejects report as CSV with columns line,reason.
void write_rejects(const std::filesystem::path& path, std::span<const RejectedRow> rejects);

}  // namespace whits
