/**
 * @file motion.hpp
 * @brief Comparative wind vectors along a track.
 */
#pragma once

#include <vector>

#include "whits/types.hpp"

namespace whits {

/// Wind speed times cosine and sine of the forward-motion angle (knots).
struct MotionVector {
  double vx{};
  double vy{};
};

/**
 * @brief Motion vector at `curr` from the step prev -> curr.
 *
 * For a zero-length step the heading falls back to `carried_heading` (radians).
 */
MotionVector motion_vector(const TrackPoint& prev, const TrackPoint& curr, double carried_heading);

/// Per-point headings in radians; stalls carry the previous heading, point 0 uses the bearing to point 1.
std::vector<double> track_headings(const std::vector<TrackPoint>& points);

/// Per-point motion vectors, one per track point.
std::vector<MotionVector> track_motion_vectors(const std::vector<TrackPoint>& points);

}  // namespace whits
