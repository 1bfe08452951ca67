#include "whits/geo.hpp"

#include <algorithm>
#include <cmath>

namespace whits {

std::string_view basin_code(Basin basin) {
  switch (basin) {
    case Basin::NA: return "NA";
    case Basin::EP: return "EP";
    case Basin::WP: return "WP";
    case Basin::NI: return "NI";
    case Basin::SI: return "SI";
    case Basin::SP: return "SP";
  }
  return "??";
}

std::optional<Basin> parse_basin(std::string_view code) {
  for (auto b : {Basin::NA, Basin::EP, Basin::WP, Basin::NI, Basin::SI, Basin::SP}) {
    if (basin_code(b) == code) return b;
  }
  return std::nullopt;
}

std::string_view convention_name(WindConvention convention) {
  switch (convention) {
    case WindConvention::OneMinute: return "one_min";
    case WindConvention::ThreeMinute: return "three_min";
    case WindConvention::TenMinute: return "ten_min";
  }
  return "??";
}

std::optional<WindConvention> parse_convention(std::string_view name) {
  for (auto c : {WindConvention::OneMinute, WindConvention::ThreeMinute, WindConvention::TenMinute}) {
    if (convention_name(c) == name) return c;
  }
  return std::nullopt;
}

double great_circle_deg(GeoPoint a, GeoPoint b) {
  const double lat1 = a.lat * kDegToRad;
  const double lat2 = b.lat * kDegToRad;
  const double s_lat = std::sin((lat2 - lat1) / 2.0);
  const double s_lon = std::sin((b.lon - a.lon) * kDegToRad / 2.0);
  const double h = s_lat * s_lat + std::cos(lat1) * std::cos(lat2) * s_lon * s_lon;
  return 2.0 * std::asin(std::sqrt(std::clamp(h, 0.0, 1.0))) * kRadToDeg;
}

double chord_for_arc_deg(double arc_deg) { return 2.0 * std::sin(arc_deg * kDegToRad / 2.0); }

double wrap_lon(double lon) {
  double w = std::fmod(lon, 360.0);
  if (w <= -180.0) w += 360.0;
  if (w > 180.0) w -= 360.0;
  return w;
}

double unwrap_lon(double reference, double lon) {
  return reference + wrap_lon(lon - reference);
}

std::optional<double> forward_heading(GeoPoint from, GeoPoint to) {
  const double dy = to.lat - from.lat;
  const double dx = (to.lon - from.lon) * std::cos(0.5 * (from.lat + to.lat) * kDegToRad);
  if (dx == 0.0 && dy == 0.0) return std::nullopt;
  return std::atan2(dy, dx);
}

}  // namespace whits
