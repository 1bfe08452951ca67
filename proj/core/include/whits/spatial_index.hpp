/**
 * @file spatial_index.hpp
 * @brief Exact great-circle radius queries over a fixed point set.
 */
#pragma once

#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "whits/types.hpp"

namespace whits {

/**
 * @brief Uniform 3-D bucket grid over unit vectors.
 *
 * Buckets points by their position on the unit sphere with cell side equal
 * to the chord of `cell_arc_deg`; radius queries scan the neighbouring cells
 * and filter with great_circle_deg, so results match an exhaustive scan.
 */
class SpatialIndex {
 public:
  SpatialIndex() = default;
  SpatialIndex(std::span<const GeoPoint> points, std::span<const PointRef> refs, double cell_arc_deg);

  /// All refs within `radius_deg` (inclusive) of `center`, sorted ascending.
  std::vector<PointRef> within(GeoPoint center, double radius_deg) const;

  std::size_t size() const { return points_.size(); }

 private:
  struct Entry {
    GeoPoint point;
    PointRef ref;
  };

  std::uint64_t key(int ix, int iy, int iz) const;
  int cell_coord(double v) const;

  double cell_side_{1.0};
  std::vector<GeoPoint> points_;
  std::unordered_map<std::uint64_t, std::vector<Entry>> cells_;
};

}  // namespace whits
