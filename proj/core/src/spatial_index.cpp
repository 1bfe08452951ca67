#include "whits/spatial_index.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "whits/geo.hpp"

namespace whits {

namespace {

constexpr int kKeyBias = 1 << 20;

std::array<double, 3> unit_vector(GeoPoint p) {
  const double lat = p.lat * kDegToRad;
  const double lon = p.lon * kDegToRad;
  return {std::cos(lat) * std::cos(lon), std::cos(lat) * std::sin(lon), std::sin(lat)};
}

}  // namespace

SpatialIndex::SpatialIndex(std::span<const GeoPoint> points, std::span<const PointRef> refs, double cell_arc_deg)
    : cell_side_(chord_for_arc_deg(std::clamp(cell_arc_deg, 1e-3, 180.0))), points_(points.begin(), points.end()) {
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto v = unit_vector(points[i]);
    cells_[key(cell_coord(v[0]), cell_coord(v[1]), cell_coord(v[2]))].push_back({points[i], refs[i]});
  }
}

int SpatialIndex::cell_coord(double v) const { return static_cast<int>(std::floor((v + 1.0) / cell_side_)); }

std::uint64_t SpatialIndex::key(int ix, int iy, int iz) const {
  auto u = [](int c) { return static_cast<std::uint64_t>(c + kKeyBias) & 0x1fffff; };
  return (u(ix) << 42) | (u(iy) << 21) | u(iz);
}

std::vector<PointRef> SpatialIndex::within(GeoPoint center, double radius_deg) const {
  std::vector<PointRef> out;
  if (radius_deg < 0.0 || cells_.empty()) return out;
  auto accept = [&](const Entry& e) {
    if (great_circle_deg(center, e.point) <= radius_deg) out.push_back(e.ref);
  };
  // Padded so that rounding in the chord never drops a point the exact test keeps.
  const double chord = chord_for_arc_deg(std::min(radius_deg, 180.0)) * (1.0 + 1e-9) + 1e-12;
  const int span = static_cast<int>(std::ceil(chord / cell_side_));
  const auto v = unit_vector(center);
  const int cx = cell_coord(v[0]), cy = cell_coord(v[1]), cz = cell_coord(v[2]);
  const auto scan_cells = static_cast<std::size_t>(2 * span + 1) * (2 * span + 1) * (2 * span + 1);
  if (scan_cells >= cells_.size()) {
    for (const auto& [k, entries] : cells_) {
      for (const auto& e : entries) accept(e);
    }
  } else {
    for (int ix = cx - span; ix <= cx + span; ++ix) {
      for (int iy = cy - span; iy <= cy + span; ++iy) {
        for (int iz = cz - span; iz <= cz + span; ++iz) {
          auto it = cells_.find(key(ix, iy, iz));
          if (it == cells_.end()) continue;
          for (const auto& e : it->second) accept(e);
        }
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace whits
