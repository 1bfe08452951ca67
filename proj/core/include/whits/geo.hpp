/**
 * @file geo.hpp
 * @brief Spherical geometry helpers (degrees throughout).
 */
#pragma once

#include <numbers>
#include <optional>

#include "whits/types.hpp"

namespace whits {

inline constexpr double kDegToRad = std::numbers::pi / 180.0;
inline constexpr double kRadToDeg = 180.0 / std::numbers::pi;

/// Central angle between two points, in degrees of arc. Longitudes may be unwrapped.
double great_circle_deg(GeoPoint a, GeoPoint b);

/// Chord length on the unit sphere for a central angle given in degrees.
double chord_for_arc_deg(double arc_deg);

/// Wraps a longitude into (-180, 180].
double wrap_lon(double lon);

/// Returns the representative of `lon` (mod 360) closest to `reference`.
double unwrap_lon(double reference, double lon);

/**
 * @brief Forward-motion angle from `from` to `to` in radians, east = 0, north = pi/2.
 *
 * Uses the local equirectangular displacement at the mean latitude. Returns
 * nullopt for zero displacement.
 */
std::optional<double> forward_heading(GeoPoint from, GeoPoint to);

}  // namespace whits
