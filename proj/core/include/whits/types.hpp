/**
 * @file types.hpp
 * @brief Core domain types shared across the whits modules.
 */
#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace whits {

/// Tropical cyclone basins handled by the simulator (South Atlantic excluded).
enum class Basin : std::uint8_t { NA, EP, WP, NI, SI, SP };

std::string_view basin_code(Basin basin);
std::optional<Basin> parse_basin(std::string_view code);

/// Agency wind-averaging period of the archived maximum sustained wind.
enum class WindConvention : std::uint8_t { OneMinute, ThreeMinute, TenMinute };

std::string_view convention_name(WindConvention convention);
std::optional<WindConvention> parse_convention(std::string_view name);

struct GeoPoint {
  double lat{};
  double lon{};

  bool operator==(const GeoPoint&) const = default;
};

/**
 * @brief One 3-hourly sample of a track.
 *
 * `lon` is continuity-unwrapped within its track, so it may leave (-180, 180].
 * `wind_u10` is on the 10-min sustained scale once the owning track is converted.
 */
struct TrackPoint {
  int step_index{};
  double lat{};
  double lon{};
  double wind_u10{};

  bool operator==(const TrackPoint&) const = default;
};

struct HistoricalTrack {
  std::string storm_id;
  Basin basin{Basin::NA};
  int genesis_year{};
  int genesis_day_of_year{};
  bool wind_filled{false};
  bool wind_converted{false};
  std::vector<TrackPoint> points;
};

/// Address of one point inside a segment library: (track index, step index).
struct PointRef {
  std::uint32_t track{};
  std::uint32_t step{};

  auto operator<=>(const PointRef&) const = default;
};

/// Bad user input or unreadable source data. Maps to CLI exit code 2.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed, truncated or stale binary/CSV artifact. Maps to CLI exit code 2.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Broken internal invariant. Maps to CLI exit code 3.
class InvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace whits
