#include "whits/motion.hpp"

#include <cmath>

#include "whits/geo.hpp"

namespace whits {

MotionVector motion_vector(const TrackPoint& prev, const TrackPoint& curr, double carried_heading) {
  const double heading =
      forward_heading({prev.lat, prev.lon}, {curr.lat, curr.lon}).value_or(carried_heading);
  return {curr.wind_u10 * std::cos(heading), curr.wind_u10 * std::sin(heading)};
}

std::vector<double> track_headings(const std::vector<TrackPoint>& points) {
  const std::size_t n = points.size();
  std::vector<double> heading(n, 0.0);
  if (n < 2) return heading;
  std::vector<std::optional<double>> step(n);
  double initial = 0.0;
  bool found = false;
  for (std::size_t k = 1; k < n; ++k) {
    step[k] = forward_heading({points[k - 1].lat, points[k - 1].lon}, {points[k].lat, points[k].lon});
    if (step[k] && !found) {
      initial = *step[k];
      found = true;
    }
  }
  heading[0] = step[1].value_or(initial);
  for (std::size_t k = 1; k < n; ++k) heading[k] = step[k].value_or(heading[k - 1]);
  return heading;
}

std::vector<MotionVector> track_motion_vectors(const std::vector<TrackPoint>& points) {
  const auto heading = track_headings(points);
  std::vector<MotionVector> out(points.size());
  for (std::size_t k = 0; k < points.size(); ++k) {
    const double w = points[k].wind_u10;
    out[k] = {w * std::cos(heading[k]), w * std::sin(heading[k])};
  }
  return out;
}

}  // namespace whits
